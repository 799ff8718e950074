// Stacked LSTM with full backpropagation through time. Gates follow the
// standard formulation: sigmoid input/forget/output gates, with the chosen
// activation (Tanh or ReLU) on the candidate and on the cell-output squash.
// The four gate blocks are packed row-wise [i; f; g; o] in one matrix per
// connection so each timestep costs two GEMMs per layer.
//
// Dropout is applied between stacked layers and before the linear head,
// never inside recurrent connections.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wellsense/conditioning.hpp"
#include "wellsense/models/common.hpp"

namespace wellsense {

struct LstmCore {
    Eigen::Index input = 0;
    Eigen::Index hidden = 0;
    int layers = 1;
    Activation activation = Activation::Tanh;  // candidate + cell squash
    double dropout_rate = 0.0;
    ParamLayout layout;
    Eigen::VectorXd theta;

    static LstmCore build(Eigen::Index input, Eigen::Index hidden, int layers, Activation act,
                          double dropout) {
        if (input < 1 || hidden < 1) throw InvalidConfigError("LstmCore: bad dimensions");
        if (layers < 1 || layers > 3) throw InvalidConfigError("LstmCore: 1 to 3 layers");
        if (act != Activation::Tanh && act != Activation::ReLU)
            throw InvalidConfigError("LstmCore: activation must be Tanh or ReLU");
        if (dropout < 0.0 || dropout >= 1.0) throw InvalidConfigError("LstmCore: dropout in [0,1)");
        LstmCore c;
        c.input = input;
        c.hidden = hidden;
        c.layers = layers;
        c.activation = act;
        c.dropout_rate = dropout;
        for (int l = 0; l < layers; ++l) {
            const Eigen::Index in_l = l == 0 ? input : hidden;
            c.layout.add("W" + std::to_string(l), 4 * hidden, in_l);
            c.layout.add("U" + std::to_string(l), 4 * hidden, hidden);
            c.layout.add("b" + std::to_string(l), 4 * hidden, 1);
        }
        c.layout.add("head_w", 1, hidden);
        c.layout.add("head_b", 1, 1);
        c.theta.setZero(c.layout.size);
        return c;
    }

    void init_params(Rng& rng) { init_fan_in(layout, theta, rng); }

    std::size_t w_idx(int l) const { return static_cast<std::size_t>(3 * l); }
    std::size_t u_idx(int l) const { return static_cast<std::size_t>(3 * l + 1); }
    std::size_t b_idx(int l) const { return static_cast<std::size_t>(3 * l + 2); }
    std::size_t head_w_idx() const { return static_cast<std::size_t>(3 * layers); }
    std::size_t head_b_idx() const { return static_cast<std::size_t>(3 * layers + 1); }

    struct StepCache {
        Eigen::MatrixXd in;        // layer input after inter-layer dropout
        Eigen::MatrixXd h_prev;    // hidden state entering the step
        Eigen::MatrixXd c_prev;    // cell state entering the step
        Eigen::MatrixXd ig, fg, gg, og;  // gate activations
        Eigen::MatrixXd g_pre;     // candidate pre-activation (for act')
        Eigen::MatrixXd c;         // new cell state
        Eigen::MatrixXd hc;        // act(c)
        Eigen::MatrixXd keep;      // dropout factor applied to this layer's input
    };

    struct Cache {
        std::vector<std::vector<StepCache>> steps;  // [layer][t]
        Eigen::MatrixXd rep;                        // top hidden at final step, pre-dropout
        Eigen::MatrixXd head_keep;
        Eigen::RowVectorXd out;
    };

    // Forward over a batch of windows. xs[t] is (input x batch), oldest step
    // first; the estimate is for the final timestep.
    Cache run_forward(const std::vector<Eigen::MatrixXd>& xs, Rng* dropout_rng) const {
        if (xs.empty()) throw ShapeMismatchError("LstmCore: empty window");
        const auto steps = static_cast<int>(xs.size());
        const Eigen::Index batch = xs[0].cols();
        const bool drop = dropout_rng != nullptr && dropout_rate > 0.0;
        const double inv_keep = drop ? 1.0 / (1.0 - dropout_rate) : 1.0;
        auto draw_keep = [&](Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols) {
            m.resize(rows, cols);
            for (Eigen::Index c = 0; c < cols; ++c)
                for (Eigen::Index r = 0; r < rows; ++r)
                    m(r, c) = dropout_rng->uniform() < dropout_rate ? 0.0 : inv_keep;
        };

        Cache cache;
        cache.steps.assign(layers, std::vector<StepCache>(steps));
        std::vector<Eigen::MatrixXd> layer_out(steps);

        for (int l = 0; l < layers; ++l) {
            const auto w = layout.mat(theta, w_idx(l));
            const auto u = layout.mat(theta, u_idx(l));
            const Eigen::VectorXd b = layout.mat(theta, b_idx(l)).col(0);
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(hidden, batch);
            Eigen::MatrixXd c = Eigen::MatrixXd::Zero(hidden, batch);

            for (int t = 0; t < steps; ++t) {
                StepCache& sc = cache.steps[l][t];
                if (l == 0) {
                    if (xs[t].rows() != input)
                        throw ShapeMismatchError("LstmCore: bad input dimension");
                    sc.in = xs[t];
                } else {
                    sc.in = layer_out[t];
                    if (drop) {
                        draw_keep(sc.keep, hidden, batch);
                        sc.in.array() *= sc.keep.array();
                    }
                }
                sc.h_prev = h;
                sc.c_prev = c;

                Eigen::MatrixXd pre = ((w * sc.in + u * h).colwise() + b).eval();
                sc.ig = pre.middleRows(0, hidden)
                            .unaryExpr([](double z) { return act::sigmoid(z); });
                sc.fg = pre.middleRows(hidden, hidden)
                            .unaryExpr([](double z) { return act::sigmoid(z); });
                sc.g_pre = pre.middleRows(2 * hidden, hidden);
                sc.gg = sc.g_pre.unaryExpr(
                    [a = activation](double z) { return act::value(a, z); });
                sc.og = pre.middleRows(3 * hidden, hidden)
                            .unaryExpr([](double z) { return act::sigmoid(z); });

                c = (sc.fg.array() * c.array() + sc.ig.array() * sc.gg.array()).matrix();
                sc.c = c;
                sc.hc = c.unaryExpr([a = activation](double z) { return act::value(a, z); });
                h = (sc.og.array() * sc.hc.array()).matrix();
                layer_out[t] = h;
            }
        }

        cache.rep = layer_out[steps - 1];
        Eigen::MatrixXd rep = cache.rep;
        if (drop) {
            draw_keep(cache.head_keep, hidden, batch);
            rep.array() *= cache.head_keep.array();
        }
        const auto head_w = layout.mat(theta, head_w_idx());
        const double head_b = layout.mat(theta, head_b_idx())(0, 0);
        cache.out = ((head_w * rep).array() + head_b).matrix();
        return cache;
    }

    Eigen::RowVectorXd forward(const std::vector<Eigen::MatrixXd>& xs) const {
        return run_forward(xs, nullptr).out;
    }

    // Top-layer hidden state at the final timestep (no dropout).
    Eigen::MatrixXd last_hidden(const std::vector<Eigen::MatrixXd>& xs) const {
        return run_forward(xs, nullptr).rep;
    }

    // Full BPTT. Returns the batch loss; writes dLoss/dtheta into `grad`.
    double loss_grad(const std::vector<Eigen::MatrixXd>& xs, const Eigen::RowVectorXd& y,
                     const LossContext& ctx, Rng* dropout_rng, Eigen::VectorXd& grad) const {
        const Cache cache = run_forward(xs, dropout_rng);
        const double value = ctx.value(cache.out, y);
        const auto steps = static_cast<int>(xs.size());
        const Eigen::Index batch = xs[0].cols();
        const bool drop = dropout_rng != nullptr && dropout_rate > 0.0;

        grad.setZero(layout.size);
        const Eigen::RowVectorXd dy = ctx.grad(cache.out, y);  // 1 x batch

        {
            Eigen::MatrixXd rep = cache.rep;
            if (drop) rep.array() *= cache.head_keep.array();
            layout.mat(grad, head_w_idx()).noalias() = dy * rep.transpose();
            layout.mat(grad, head_b_idx())(0, 0) = dy.sum();
        }

        // dh arriving at each (layer, t) from above; top layer only receives
        // the head signal at the final step.
        std::vector<std::vector<Eigen::MatrixXd>> dh_above(
            layers, std::vector<Eigen::MatrixXd>(steps));
        {
            Eigen::MatrixXd d = layout.mat(theta, head_w_idx()).transpose() * dy;
            if (drop) d.array() *= cache.head_keep.array();
            dh_above[layers - 1][steps - 1] = std::move(d);
        }

        for (int l = layers - 1; l >= 0; --l) {
            auto dw = layout.mat(grad, w_idx(l));
            auto du = layout.mat(grad, u_idx(l));
            auto db = layout.mat(grad, b_idx(l));
            const auto w = layout.mat(theta, w_idx(l));
            const auto u = layout.mat(theta, u_idx(l));

            Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(hidden, batch);
            Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(hidden, batch);
            Eigen::MatrixXd dpre(4 * hidden, batch);

            for (int t = steps - 1; t >= 0; --t) {
                const StepCache& sc = cache.steps[l][t];
                Eigen::MatrixXd dh = dh_next;
                if (dh_above[l][t].size() > 0) dh += dh_above[l][t];

                // Output gate and cell.
                const Eigen::ArrayXXd do_ = dh.array() * sc.hc.array();
                const Eigen::ArrayXXd act_prime_c =
                    activation == Activation::Tanh
                        ? Eigen::ArrayXXd(1.0 - sc.hc.array().square())
                        : Eigen::ArrayXXd(sc.c.array().unaryExpr(
                              [](double v) { return v > 0.0 ? 1.0 : 0.0; }));
                Eigen::ArrayXXd dc = dh.array() * sc.og.array() * act_prime_c + dc_next.array();

                const Eigen::ArrayXXd dpre_o = do_ * sc.og.array() * (1.0 - sc.og.array());
                const Eigen::ArrayXXd dpre_f =
                    dc * sc.c_prev.array() * sc.fg.array() * (1.0 - sc.fg.array());
                const Eigen::ArrayXXd dpre_i =
                    dc * sc.gg.array() * sc.ig.array() * (1.0 - sc.ig.array());
                const Eigen::ArrayXXd act_prime_g =
                    activation == Activation::Tanh
                        ? Eigen::ArrayXXd(1.0 - sc.gg.array().square())
                        : Eigen::ArrayXXd(sc.g_pre.array().unaryExpr(
                              [](double v) { return v > 0.0 ? 1.0 : 0.0; }));
                const Eigen::ArrayXXd dpre_g = dc * sc.ig.array() * act_prime_g;

                dc_next = (dc * sc.fg.array()).matrix();

                dpre.middleRows(0, hidden) = dpre_i.matrix();
                dpre.middleRows(hidden, hidden) = dpre_f.matrix();
                dpre.middleRows(2 * hidden, hidden) = dpre_g.matrix();
                dpre.middleRows(3 * hidden, hidden) = dpre_o.matrix();

                dw.noalias() += dpre * sc.in.transpose();
                du.noalias() += dpre * sc.h_prev.transpose();
                db.col(0) += dpre.rowwise().sum();

                dh_next.noalias() = u.transpose() * dpre;
                if (l > 0) {
                    Eigen::MatrixXd din = w.transpose() * dpre;
                    if (drop) din.array() *= cache.steps[l][t].keep.array();
                    dh_above[l - 1][t] = std::move(din);
                }
            }
        }
        return value;
    }
};

// The LSTM estimator plus its data-space adapters. `p` is the number of
// previous timesteps; a window carries p+1 rows, oldest first.
struct LstmModel {
    FeatureSet feature_set;
    ScalerSet scaler;
    LstmCore net;
    int p = 2;
};

// Forward pass on an already-scaled window ((p+1) x n, oldest row first);
// returns the scaled estimate for the final timestep.
inline double lstm_forward(const LstmModel& m, const Eigen::MatrixXd& window_scaled) {
    if (window_scaled.rows() != m.p + 1 || window_scaled.cols() != m.net.input)
        throw ShapeMismatchError("lstm_forward: window shape mismatch");
    std::vector<Eigen::MatrixXd> xs(static_cast<std::size_t>(m.p) + 1);
    for (int t = 0; t <= m.p; ++t) xs[static_cast<std::size_t>(t)] = window_scaled.row(t).transpose();
    return m.net.forward(xs)(0);
}

}  // namespace wellsense
