#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

#include "flowae/error.hpp"

// Closed-form calculators for brute-force, DoS and reconnaissance threats.
namespace flowae::threat {

using BigInt = boost::multiprecision::cpp_int;

struct BruteForceParams {
    std::uint64_t alphabet_size = 2;    // A >= 2
    std::uint64_t password_length = 1;  // k >= 1
    double guess_time = 1.0;            // T > 0, seconds per guess
    std::uint64_t processors = 1;       // p >= 1
    double elapsed = 0.0;               // t >= 0, seconds

    void validate() const {
        if (alphabet_size < 2 || password_length < 1 || !(guess_time > 0.0) || processors < 1 || !(elapsed >= 0.0)) {
            throw Error(ErrorKind::InvalidConfig, "brute force parameters out of range");
        }
    }
};

// N = A^k, exact.
inline BigInt keyspace(const BruteForceParams& p) {
    return boost::multiprecision::pow(BigInt(p.alphabet_size), static_cast<unsigned>(p.password_length));
}

// N / (2p) * T
inline double brute_force_expected_time(const BruteForceParams& p) {
    p.validate();
    const double n = keyspace(p).convert_to<double>();
    return n / (2.0 * static_cast<double>(p.processors)) * p.guess_time;
}

// min(r t / N, 1) with r = 1/T
inline double brute_force_success_prob(const BruteForceParams& p) {
    p.validate();
    const double rate = 1.0 / p.guess_time;
    const double n = keyspace(p).convert_to<double>();
    return std::min(rate * p.elapsed / n, 1.0);
}

struct DosParams {
    double capacity = 1.0;       // C > 0, requests/s
    double legit_rate = 0.0;     // R_legit
    double attack_rate = 0.0;    // R_attack
    double legit_arrival = 0.0;  // lambda_legit
    double attack_arrival = 0.0; // lambda_attack
    double service_rate = 1.0;   // mu > 0

    void validate() const {
        auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
        if (!(capacity > 0.0) || !std::isfinite(capacity) || !ok(legit_rate) || !ok(attack_rate) || !ok(legit_arrival) ||
            !ok(attack_arrival) || !(service_rate > 0.0) || !std::isfinite(service_rate)) {
            throw Error(ErrorKind::InvalidConfig, "DoS parameters out of range");
        }
    }
};

struct DosResult {
    bool overloaded;
    double overload_ratio;    // (lambda_legit + lambda_attack) / mu, unbounded
    double overload_clamped;  // ratio clamped to [0, 1]
};

inline DosResult dos_overload(const DosParams& p) {
    p.validate();
    const double ratio = (p.legit_arrival + p.attack_arrival) / p.service_rate;
    return DosResult{p.legit_rate + p.attack_rate > p.capacity, ratio, std::clamp(ratio, 0.0, 1.0)};
}

struct ReconParams {
    std::uint64_t ip_count = 1;       // N
    std::uint64_t port_count = 1;     // P
    std::uint64_t service_count = 1;  // S
    double scan_rate = 0.0;           // r_scan
    double detection_scale = 0.0;     // beta
    double time = 0.0;                // T
    std::uint64_t vulnerabilities = 1;  // V
    std::uint64_t exploitable = 0;      // v in [0, V]
    double detection_threshold = 0.0;   // d; carried for completeness, no formula uses it

    void validate() const {
        if (ip_count < 1 || port_count < 1 || service_count < 1 || vulnerabilities < 1 || exploitable > vulnerabilities ||
            !(scan_rate >= 0.0) || !(detection_scale >= 0.0) || !(time >= 0.0)) {
            throw Error(ErrorKind::InvalidConfig, "recon parameters out of range");
        }
    }
};

// Omega = N * P * S, exact.
inline BigInt recon_search_space(const ReconParams& p) {
    p.validate();
    return BigInt(p.ip_count) * BigInt(p.port_count) * BigInt(p.service_count);
}

// 1 - exp(-beta * r_scan * T)
inline double recon_detect_prob(const ReconParams& p) {
    p.validate();
    return -std::expm1(-p.detection_scale * p.scan_rate * p.time);
}

// 1 - ((V - v) / V)^(r_scan * T)
inline double recon_success_prob(const ReconParams& p) {
    p.validate();
    const double exponent = p.scan_rate * p.time;
    const double miss = static_cast<double>(p.vulnerabilities - p.exploitable) / static_cast<double>(p.vulnerabilities);
    return std::clamp(1.0 - std::pow(miss, exponent), 0.0, 1.0);
}

}  // namespace flowae::threat
