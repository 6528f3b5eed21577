#include <gtest/gtest.h>

#include "flowae.hpp"

using namespace flowae;
using namespace flowae::threat;

TEST(BruteForce, ExpectedTime) {
    BruteForceParams p{2, 3, 1.0, 1, 0.0};
    EXPECT_EQ(brute_force_expected_time(p), 4.0);
    p.processors = 2;
    EXPECT_EQ(brute_force_expected_time(p), 2.0);
    EXPECT_EQ(brute_force_expected_time(BruteForceParams{2, 1, 2.0, 1, 0.0}), 2.0);
}

TEST(BruteForce, SuccessProbability) {
    EXPECT_EQ(brute_force_success_prob(BruteForceParams{2, 3, 1.0, 1, 0.0}), 0.0);
    EXPECT_EQ(brute_force_success_prob(BruteForceParams{2, 3, 1.0, 1, 8.0}), 1.0);
    EXPECT_EQ(brute_force_success_prob(BruteForceParams{2, 3, 1.0, 1, 2.0}), 0.25);
    EXPECT_EQ(brute_force_success_prob(BruteForceParams{2, 3, 1.0, 1, 1e9}), 1.0);
}

TEST(BruteForce, KeyspaceIsExact) {
    BruteForceParams p{62, 40, 1.0, 1, 0.0};
    BigInt expected = 1;
    for (int i = 0; i < 40; ++i) expected *= 62;
    EXPECT_EQ(keyspace(p), expected);
    EXPECT_GT(brute_force_expected_time(p), 1e70);
}

TEST(BruteForce, InvalidParams) {
    EXPECT_THROW(brute_force_expected_time(BruteForceParams{1, 3, 1.0, 1, 0.0}), Error);
    EXPECT_THROW(brute_force_expected_time(BruteForceParams{2, 0, 1.0, 1, 0.0}), Error);
    EXPECT_THROW(brute_force_expected_time(BruteForceParams{2, 3, 0.0, 1, 0.0}), Error);
    EXPECT_THROW(brute_force_success_prob(BruteForceParams{2, 3, 1.0, 1, -1.0}), Error);
}

TEST(Dos, Overload) {
    DosParams p;
    p.capacity = 10;
    p.legit_rate = 5;
    EXPECT_FALSE(dos_overload(p).overloaded);
    p.attack_rate = 5;
    EXPECT_FALSE(dos_overload(p).overloaded);
    p.attack_rate = 5.5;
    EXPECT_TRUE(dos_overload(p).overloaded);
}

TEST(Dos, QueueRatio) {
    DosParams p;
    p.legit_arrival = 3;
    p.attack_arrival = 2;
    p.service_rate = 10;
    EXPECT_EQ(dos_overload(p).overload_ratio, 0.5);
    p.attack_arrival = 27;
    EXPECT_EQ(dos_overload(p).overload_ratio, 3.0);
    EXPECT_EQ(dos_overload(p).overload_clamped, 1.0);
    p.service_rate = 0;
    EXPECT_THROW(dos_overload(p), Error);
}

TEST(Recon, SearchSpace) {
    ReconParams p;
    EXPECT_EQ(recon_search_space(p), 1);
    p.ip_count = 256;
    p.port_count = 1024;
    p.service_count = 4;
    EXPECT_EQ(recon_search_space(p), 1048576);
    p.port_count = 1;
    EXPECT_EQ(recon_search_space(p), 1024);
}

TEST(Recon, DetectProbability) {
    ReconParams p;
    p.scan_rate = 5;
    p.detection_scale = 0.3;
    p.time = 0;
    EXPECT_EQ(recon_detect_prob(p), 0.0);
    p.time = 100;
    p.detection_scale = 0;
    EXPECT_EQ(recon_detect_prob(p), 0.0);
    p.detection_scale = 1;
    p.scan_rate = 1;
    p.time = std::log(2.0);
    EXPECT_NEAR(recon_detect_prob(p), 0.5, 1e-15);
}

TEST(Recon, SuccessProbability) {
    ReconParams p;
    p.vulnerabilities = 4;
    p.exploitable = 4;
    p.scan_rate = 1;
    p.time = 1;
    EXPECT_EQ(recon_success_prob(p), 1.0);
    p.exploitable = 0;
    EXPECT_EQ(recon_success_prob(p), 0.0);
    p.exploitable = 1;
    p.time = 2;
    EXPECT_EQ(recon_success_prob(p), 0.4375);
    p.exploitable = 5;
    EXPECT_THROW(recon_success_prob(p), Error);
}

TEST(ThreatProperties, RandomizedMonotonicity) {
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
        BruteForceParams b{2 + uniform_index(rng, 60), 1 + uniform_index(rng, 12), uniform(rng, 1e-6, 10),
                           1 + uniform_index(rng, 64), uniform(rng, 0, 1e6)};
        auto longer = b;
        ++longer.password_length;
        auto more = b;
        ++more.processors;
        EXPECT_LT(brute_force_expected_time(b), brute_force_expected_time(longer));
        EXPECT_GT(brute_force_expected_time(b), brute_force_expected_time(more));
        const double ps = brute_force_success_prob(b);
        EXPECT_GE(ps, 0.0);
        EXPECT_LE(ps, 1.0);

        DosParams d{uniform(rng, 1, 100), uniform(rng, 0, 100), uniform(rng, 0, 100),
                    uniform(rng, 0, 50),  uniform(rng, 0, 50),  uniform(rng, 0.1, 100)};
        auto swapped = d;
        std::swap(swapped.legit_rate, swapped.attack_rate);
        EXPECT_EQ(dos_overload(d).overloaded, dos_overload(swapped).overloaded);
        EXPECT_GE(dos_overload(d).overload_clamped, 0.0);
        EXPECT_LE(dos_overload(d).overload_clamped, 1.0);

        ReconParams r;
        r.scan_rate = uniform(rng, 0, 10);
        r.detection_scale = uniform(rng, 0, 1);
        r.time = uniform(rng, 0, 10);
        r.vulnerabilities = 1 + uniform_index(rng, 20);
        r.exploitable = uniform_index(rng, r.vulnerabilities + 1);
        auto later = r;
        later.time += uniform(rng, 0, 5);
        EXPECT_LE(recon_detect_prob(r), recon_detect_prob(later));
        auto faster = r;
        faster.scan_rate += uniform(rng, 0, 5);
        EXPECT_LE(recon_detect_prob(r), recon_detect_prob(faster));
        for (double v : {recon_detect_prob(r), recon_success_prob(r)}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}
