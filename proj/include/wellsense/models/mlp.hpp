// Feed-forward network with batched analytic backpropagation. Columns are
// samples. Dropout zeroes hidden activations during training (inverted
// scaling keeps the expected activation unchanged); inference never drops.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wellsense/conditioning.hpp"
#include "wellsense/models/common.hpp"

namespace wellsense {

struct DenseCore {
    std::vector<Eigen::Index> widths;  // [input, hidden..., 1]
    Activation activation = Activation::ReLU;
    double dropout_rate = 0.0;
    ParamLayout layout;
    Eigen::VectorXd theta;

    int n_layers() const { return static_cast<int>(widths.size()) - 1; }
    Eigen::Index input_dim() const { return widths.front(); }
    Eigen::Index last_hidden_dim() const { return widths[widths.size() - 2]; }

    static DenseCore build(std::vector<Eigen::Index> widths, Activation act, double dropout) {
        if (widths.size() < 3) throw InvalidConfigError("DenseCore: need a hidden layer");
        if (widths.back() != 1) throw InvalidConfigError("DenseCore: output width must be 1");
        const std::size_t hidden_count = widths.size() - 2;
        if (hidden_count > 3) throw InvalidConfigError("DenseCore: 1 to 3 hidden layers");
        for (Eigen::Index w : widths)
            if (w < 1) throw InvalidConfigError("DenseCore: layer width must be >= 1");
        if (dropout < 0.0 || dropout >= 1.0)
            throw InvalidConfigError("DenseCore: dropout in [0, 1)");
        DenseCore c;
        c.widths = std::move(widths);
        c.activation = act;
        c.dropout_rate = dropout;
        for (int l = 0; l + 1 < static_cast<int>(c.widths.size()); ++l) {
            c.layout.add("W" + std::to_string(l), c.widths[l + 1], c.widths[l]);
            c.layout.add("b" + std::to_string(l), c.widths[l + 1], 1);
        }
        c.theta.setZero(c.layout.size);
        return c;
    }

    void init_params(Rng& rng) { init_fan_in(layout, theta, rng); }

    struct Cache {
        std::vector<Eigen::MatrixXd> inputs;  // input to each layer
        std::vector<Eigen::MatrixXd> pre;     // pre-activations
        std::vector<Eigen::MatrixXd> keep;    // dropout factors (empty when off)
        Eigen::RowVectorXd out;
    };

    // Forward pass over a batch (columns = samples). Dropout is applied only
    // when an RNG is supplied and the rate is positive.
    Cache run_forward(const Eigen::MatrixXd& x, Rng* dropout_rng) const {
        if (x.rows() != input_dim()) throw ShapeMismatchError("DenseCore: bad input dimension");
        const int layers = n_layers();
        Cache cache;
        cache.inputs.resize(layers);
        cache.pre.resize(layers);
        cache.keep.resize(layers);

        const bool drop = dropout_rng != nullptr && dropout_rate > 0.0;
        const double inv_keep = drop ? 1.0 / (1.0 - dropout_rate) : 1.0;

        Eigen::MatrixXd h = x;
        for (int l = 0; l < layers; ++l) {
            cache.inputs[l] = h;
            Eigen::MatrixXd z = (layout.mat(theta, 2 * l) * h).colwise() +
                                Eigen::VectorXd(layout.mat(theta, 2 * l + 1).col(0));
            cache.pre[l] = z;
            if (l + 1 < layers) {
                act::apply(activation, z);
                if (drop) {
                    auto& keep = cache.keep[l];
                    keep.resize(z.rows(), z.cols());
                    for (Eigen::Index c = 0; c < z.cols(); ++c)
                        for (Eigen::Index r = 0; r < z.rows(); ++r)
                            keep(r, c) = dropout_rng->uniform() < dropout_rate ? 0.0 : inv_keep;
                    z.array() *= keep.array();
                }
            }
            h = std::move(z);
        }
        cache.out = h.row(0);
        return cache;
    }

    Eigen::RowVectorXd forward(const Eigen::MatrixXd& x) const {
        return run_forward(x, nullptr).out;
    }

    // Activations of the last hidden layer (no dropout); the representation
    // a transfer extension builds on.
    Eigen::MatrixXd last_hidden(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd h = x;
        const int layers = n_layers();
        for (int l = 0; l + 1 < layers; ++l) {
            Eigen::MatrixXd z = (layout.mat(theta, 2 * l) * h).colwise() +
                                Eigen::VectorXd(layout.mat(theta, 2 * l + 1).col(0));
            act::apply(activation, z);
            h = std::move(z);
        }
        return h;
    }

    // Training step: dropout forward, analytic backprop. Returns the batch
    // loss; writes dLoss/dtheta into `grad`.
    double loss_grad(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y,
                     const LossContext& ctx, Rng* dropout_rng, Eigen::VectorXd& grad) const {
        const Cache cache = run_forward(x, dropout_rng);
        const double value = ctx.value(cache.out, y);
        const int layers = n_layers();
        const bool drop = dropout_rng != nullptr && dropout_rate > 0.0;

        grad.setZero(layout.size);
        Eigen::MatrixXd delta = ctx.grad(cache.out, y);  // 1 x batch
        for (int l = layers - 1; l >= 0; --l) {
            layout.mat(grad, 2 * l).noalias() = delta * cache.inputs[l].transpose();
            layout.mat(grad, 2 * l + 1).col(0) = delta.rowwise().sum();
            if (l > 0) {
                Eigen::MatrixXd next = layout.mat(theta, 2 * l).transpose() * delta;
                if (drop) next.array() *= cache.keep[l - 1].array();
                next.array() *= act::deriv_from_pre(activation, cache.pre[l - 1]).array();
                delta = std::move(next);
            }
        }
        return value;
    }
};

// The MLP estimator: a dense core plus the data-space adapters (feature
// set, scalers). Inputs are current-day feature vectors (p = 0).
struct MlpModel {
    FeatureSet feature_set;
    ScalerSet scaler;
    DenseCore net;
};

// Forward pass on an already-scaled input. Training mode applies dropout
// and therefore needs an RNG; inference is pure and deterministic.
inline double mlp_forward(const MlpModel& m, const Eigen::VectorXd& x_scaled,
                          bool train_mode = false, Rng* rng = nullptr) {
    if (x_scaled.size() != m.net.input_dim())
        throw ShapeMismatchError("mlp_forward: feature dimension mismatch");
    Rng* dropout_rng = train_mode ? rng : nullptr;
    if (train_mode && m.net.dropout_rate > 0.0 && !rng)
        throw InvalidConfigError("mlp_forward: training mode needs an RNG");
    return m.net.run_forward(x_scaled, dropout_rng).out(0);
}

}  // namespace wellsense
