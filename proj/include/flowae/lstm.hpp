#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace flowae {

// One LSTM layer. Gate blocks are stacked [input; forget; candidate; output],
// each hidden_dim rows.
struct LstmLayer {
    Eigen::MatrixXd w_input;   // 4H x in
    Eigen::MatrixXd w_hidden;  // 4H x H
    Eigen::VectorXd bias;      // 4H

    LstmLayer() = default;
    LstmLayer(Eigen::Index input_dim, Eigen::Index hidden_dim)
        : w_input(Eigen::MatrixXd::Zero(4 * hidden_dim, input_dim)),
          w_hidden(Eigen::MatrixXd::Zero(4 * hidden_dim, hidden_dim)),
          bias(Eigen::VectorXd::Zero(4 * hidden_dim)) {}

    Eigen::Index hidden_dim() const noexcept { return w_hidden.cols(); }
    Eigen::Index input_dim() const noexcept { return w_input.cols(); }
};

// Everything the backward pass needs from one unrolled forward pass.
struct LstmTrace {
    Eigen::MatrixXd inputs;   // L x in
    Eigen::MatrixXd gates;    // L x 4H, post-activation
    Eigen::MatrixXd cells;    // L x H
    Eigen::MatrixXd hiddens;  // L x H
    Eigen::VectorXd h0;
    Eigen::VectorXd c0;

    Eigen::Index steps() const noexcept { return hiddens.rows(); }
};

namespace detail {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace detail

inline LstmTrace lstm_forward(const LstmLayer& layer, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& h0,
                              const Eigen::VectorXd& c0) {
    const Eigen::Index H = layer.hidden_dim();
    const Eigen::Index L = inputs.rows();
    LstmTrace trace;
    trace.inputs = inputs;
    trace.gates.resize(L, 4 * H);
    trace.cells.resize(L, H);
    trace.hiddens.resize(L, H);
    trace.h0 = h0;
    trace.c0 = c0;

    Eigen::VectorXd h = h0;
    Eigen::VectorXd c = c0;
    Eigen::VectorXd pre(4 * H);
    for (Eigen::Index t = 0; t < L; ++t) {
        pre.noalias() = layer.w_hidden * h + layer.bias;
        if (layer.input_dim() > 0) pre.noalias() += layer.w_input * inputs.row(t).transpose();
        for (Eigen::Index j = 0; j < H; ++j) {
            const double i_gate = detail::sigmoid(pre(j));
            const double f_gate = detail::sigmoid(pre(H + j));
            const double g_cand = std::tanh(pre(2 * H + j));
            const double o_gate = detail::sigmoid(pre(3 * H + j));
            c(j) = f_gate * c(j) + i_gate * g_cand;
            h(j) = o_gate * std::tanh(c(j));
            trace.gates(t, j) = i_gate;
            trace.gates(t, H + j) = f_gate;
            trace.gates(t, 2 * H + j) = g_cand;
            trace.gates(t, 3 * H + j) = o_gate;
        }
        trace.cells.row(t) = c.transpose();
        trace.hiddens.row(t) = h.transpose();
    }
    return trace;
}

struct LstmInputGradients {
    Eigen::MatrixXd inputs;  // L x in
    Eigen::VectorXd h0;
    Eigen::VectorXd c0;
};

// Backpropagation through time. d_hiddens holds dLoss/dh_t coming from
// outside the recurrence (L x H). Parameter gradients are accumulated into grad.
inline LstmInputGradients lstm_backward(const LstmLayer& layer, const LstmTrace& trace, const Eigen::MatrixXd& d_hiddens,
                                        LstmLayer& grad) {
    const Eigen::Index H = layer.hidden_dim();
    const Eigen::Index L = trace.steps();
    LstmInputGradients out;
    out.inputs = Eigen::MatrixXd::Zero(L, layer.input_dim());

    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd d_pre(4 * H);
    for (Eigen::Index t = L - 1; t >= 0; --t) {
        for (Eigen::Index j = 0; j < H; ++j) {
            const double i_gate = trace.gates(t, j);
            const double f_gate = trace.gates(t, H + j);
            const double g_cand = trace.gates(t, 2 * H + j);
            const double o_gate = trace.gates(t, 3 * H + j);
            const double c_prev = t > 0 ? trace.cells(t - 1, j) : trace.c0(j);
            const double tanh_c = std::tanh(trace.cells(t, j));

            const double dh = d_hiddens(t, j) + dh_next(j);
            const double dc = dc_next(j) + dh * o_gate * (1.0 - tanh_c * tanh_c);
            d_pre(j) = dc * g_cand * i_gate * (1.0 - i_gate);
            d_pre(H + j) = dc * c_prev * f_gate * (1.0 - f_gate);
            d_pre(2 * H + j) = dc * i_gate * (1.0 - g_cand * g_cand);
            d_pre(3 * H + j) = dh * tanh_c * o_gate * (1.0 - o_gate);
            dc_next(j) = dc * f_gate;
        }
        if (t > 0) {
            grad.w_hidden.noalias() += d_pre * trace.hiddens.row(t - 1);
        } else {
            grad.w_hidden.noalias() += d_pre * trace.h0.transpose();
        }
        grad.bias += d_pre;
        if (layer.input_dim() > 0) {
            grad.w_input.noalias() += d_pre * trace.inputs.row(t);
            out.inputs.row(t).noalias() = (layer.w_input.transpose() * d_pre).transpose();
        }
        dh_next.noalias() = layer.w_hidden.transpose() * d_pre;
    }
    out.h0 = dh_next;
    out.c0 = dc_next;
    return out;
}

}  // namespace flowae
