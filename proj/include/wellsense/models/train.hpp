// Mini-batch Adam training for the dense and recurrent cores, plus the
// raw-space prediction wrappers. Training is single-threaded and fully
// deterministic for a given seed; optional early stopping watches MAPE on a
// caller-supplied holdout (never a CV validation fold).
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "wellsense/conditioning.hpp"
#include "wellsense/models/common.hpp"
#include "wellsense/models/lstm.hpp"
#include "wellsense/models/mlp.hpp"
#include "wellsense/models/ridge.hpp"

namespace wellsense {

struct TrainResult {
    std::vector<double> loss_curve;  // mean batch loss per epoch
    int epochs_run = 0;
    bool early_stopped = false;
    double best_metric = std::numeric_limits<double>::quiet_NaN();
};

// ---------------------------------------------------------------------------
// Scaled tensor views of windowed samples
// ---------------------------------------------------------------------------

struct DenseData {
    Eigen::MatrixXd x;      // input x N, scaled
    Eigen::RowVectorXd y;   // scaled targets
    std::vector<double> y_raw;
};

struct SeqData {
    std::vector<Eigen::MatrixXd> xs;  // per timestep, input x N, scaled
    Eigen::RowVectorXd y;
    std::vector<double> y_raw;
};

inline DenseData prepare_dense(const std::vector<WindowedSample>& windows, const ScalerSet& sc) {
    if (windows.empty()) throw TooFewSamplesError("prepare_dense: no samples");
    const Eigen::Index n_feat = windows[0].x.cols();
    const auto n = static_cast<Eigen::Index>(windows.size());
    DenseData d;
    d.x.resize(n_feat, n);
    d.y.resize(n);
    d.y_raw.resize(windows.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const WindowedSample& w = windows[static_cast<std::size_t>(i)];
        if (w.x.rows() != 1 || w.x.cols() != n_feat)
            throw ShapeMismatchError("prepare_dense: expected p = 0 windows");
        for (Eigen::Index j = 0; j < n_feat; ++j)
            d.x(j, i) = sc.features.transform(static_cast<std::size_t>(j), w.x(0, j));
        d.y(i) = sc.scale_target(w.y);
        d.y_raw[static_cast<std::size_t>(i)] = w.y;
    }
    return d;
}

inline SeqData prepare_seq(const std::vector<WindowedSample>& windows, const ScalerSet& sc,
                           int p) {
    if (windows.empty()) throw TooFewSamplesError("prepare_seq: no samples");
    const Eigen::Index n_feat = windows[0].x.cols();
    const auto n = static_cast<Eigen::Index>(windows.size());
    SeqData d;
    d.xs.assign(static_cast<std::size_t>(p) + 1, Eigen::MatrixXd(n_feat, n));
    d.y.resize(n);
    d.y_raw.resize(windows.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const WindowedSample& w = windows[static_cast<std::size_t>(i)];
        if (w.x.rows() != p + 1 || w.x.cols() != n_feat)
            throw ShapeMismatchError("prepare_seq: window does not match p");
        for (int t = 0; t <= p; ++t)
            for (Eigen::Index j = 0; j < n_feat; ++j)
                d.xs[static_cast<std::size_t>(t)](j, i) =
                    sc.features.transform(static_cast<std::size_t>(j), w.x(t, j));
        d.y(i) = sc.scale_target(w.y);
        d.y_raw[static_cast<std::size_t>(i)] = w.y;
    }
    return d;
}

namespace detail {

inline Eigen::MatrixXd take_cols(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
    return out;
}

inline Eigen::RowVectorXd take(const Eigen::RowVectorXd& v, const std::vector<Eigen::Index>& idx) {
    Eigen::RowVectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(idx[k]);
    return out;
}

struct DenseOps {
    DenseCore& core;
    double batch_loss_grad(const DenseData& d, const std::vector<Eigen::Index>& idx,
                           const LossContext& ctx, Rng* rng, Eigen::VectorXd& grad) const {
        return core.loss_grad(take_cols(d.x, idx), take(d.y, idx), ctx, rng, grad);
    }
    Eigen::RowVectorXd predict_scaled(const DenseData& d) const { return core.forward(d.x); }
    Eigen::VectorXd& theta() const { return core.theta; }
};

struct SeqOps {
    LstmCore& core;
    double batch_loss_grad(const SeqData& d, const std::vector<Eigen::Index>& idx,
                           const LossContext& ctx, Rng* rng, Eigen::VectorXd& grad) const {
        std::vector<Eigen::MatrixXd> xb(d.xs.size());
        for (std::size_t t = 0; t < d.xs.size(); ++t) xb[t] = take_cols(d.xs[t], idx);
        return core.loss_grad(xb, take(d.y, idx), ctx, rng, grad);
    }
    Eigen::RowVectorXd predict_scaled(const SeqData& d) const { return core.forward(d.xs); }
    Eigen::VectorXd& theta() const { return core.theta; }
};

// Pooled MAPE (%) of de-normalized predictions; the early-stopping metric.
template <class Ops, class Data>
double holdout_mape(const Ops& ops, const Data& d, const ScalerSet& sc) {
    const Eigen::RowVectorXd pred = ops.predict_scaled(d);
    double s = 0.0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const double actual = d.y_raw[static_cast<std::size_t>(i)];
        if (actual == 0.0) throw DomainError("holdout_mape: zero actual");
        s += std::abs((sc.unscale_target(pred(i)) - actual) / actual);
    }
    return 100.0 * s / static_cast<double>(pred.size());
}

template <class Ops, class Data>
TrainResult train_core(Ops ops, const Data& data, const TrainSpec& spec, const LossContext& ctx,
                       const std::vector<std::uint8_t>* frozen, const Data* early_stop,
                       const ScalerSet& sc) {
    spec.validate();
    Eigen::VectorXd& theta = ops.theta();
    if (frozen && static_cast<Eigen::Index>(frozen->size()) != theta.size())
        throw ShapeMismatchError("frozen mask size mismatch");

    const auto n = static_cast<Eigen::Index>(data.y.size());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    Eigen::VectorXd grad(theta.size());
    Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
    long adam_t = 0;

    TrainResult result;
    Eigen::VectorXd best_theta = theta;
    double best_metric = std::numeric_limits<double>::infinity();
    int since_best = 0;
    const Rng seed_root(spec.seed);

    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        Rng shuffle_rng = seed_root.split(1000 + static_cast<std::uint64_t>(epoch));
        Rng dropout_rng = seed_root.split(2000 + static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        int batches = 0;
        for (Eigen::Index start = 0; start < n; start += spec.batch_size) {
            const auto end = std::min<Eigen::Index>(start + spec.batch_size, n);
            const std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + end);
            epoch_loss += ops.batch_loss_grad(data, idx, ctx, &dropout_rng, grad);
            ++batches;

            if (frozen)
                for (Eigen::Index i = 0; i < grad.size(); ++i)
                    if ((*frozen)[static_cast<std::size_t>(i)]) grad(i) = 0.0;

            ++adam_t;
            m = spec.adam_beta1 * m + (1.0 - spec.adam_beta1) * grad;
            v = spec.adam_beta2 * v + (1.0 - spec.adam_beta2) * grad.cwiseProduct(grad);
            const double bc1 = 1.0 - std::pow(spec.adam_beta1, static_cast<double>(adam_t));
            const double bc2 = 1.0 - std::pow(spec.adam_beta2, static_cast<double>(adam_t));
            theta.array() -= spec.learning_rate * (m.array() / bc1) /
                             ((v.array() / bc2).sqrt() + spec.adam_eps);
        }
        epoch_loss /= std::max(1, batches);
        if (!std::isfinite(epoch_loss)) throw DivergenceError("training loss is not finite");
        result.loss_curve.push_back(epoch_loss);
        result.epochs_run = epoch + 1;

        if (early_stop) {
            const double metric = holdout_mape(ops, *early_stop, sc);
            if (metric < best_metric) {
                best_metric = metric;
                best_theta = theta;
                since_best = 0;
            } else if (++since_best >= spec.early_stop_patience) {
                result.early_stopped = true;
                break;
            }
        }
    }

    if (early_stop && best_metric < std::numeric_limits<double>::infinity()) {
        theta = best_theta;
        result.best_metric = best_metric;
    }
    return result;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model-level training entry points
// ---------------------------------------------------------------------------

inline TrainResult train(MlpModel& model, const std::vector<WindowedSample>& data,
                         const TrainSpec& spec,
                         const std::vector<WindowedSample>* early_stop = nullptr,
                         const std::vector<std::uint8_t>* frozen = nullptr) {
    const DenseData d = prepare_dense(data, model.scaler);
    std::optional<DenseData> es;
    if (early_stop && !early_stop->empty()) es = prepare_dense(*early_stop, model.scaler);
    const LossContext ctx{spec.loss, &model.scaler.target};
    return detail::train_core(detail::DenseOps{model.net}, d, spec, ctx, frozen,
                              es ? &*es : nullptr, model.scaler);
}

inline TrainResult train(LstmModel& model, const std::vector<WindowedSample>& data,
                         const TrainSpec& spec,
                         const std::vector<WindowedSample>* early_stop = nullptr,
                         const std::vector<std::uint8_t>* frozen = nullptr) {
    const SeqData d = prepare_seq(data, model.scaler, model.p);
    std::optional<SeqData> es;
    if (early_stop && !early_stop->empty()) es = prepare_seq(*early_stop, model.scaler, model.p);
    const LossContext ctx{spec.loss, &model.scaler.target};
    return detail::train_core(detail::SeqOps{model.net}, d, spec, ctx, frozen,
                              es ? &*es : nullptr, model.scaler);
}

// Per-coefficient freeze mask from tensor names.
template <class Core>
std::vector<std::uint8_t> freeze_mask(const Core& core,
                                      const std::vector<std::string>& frozen_tensors) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(core.layout.size), 0);
    for (const std::string& name : frozen_tensors) {
        const TensorSpec& t = core.layout.tensors[core.layout.index_of(name)];
        for (Eigen::Index i = 0; i < t.rows * t.cols; ++i)
            mask[static_cast<std::size_t>(t.offset + i)] = 1;
    }
    return mask;
}

// ---------------------------------------------------------------------------
// Raw-space prediction (scaling on entry, inverse scaling on exit)
// ---------------------------------------------------------------------------

inline Eigen::VectorXd scale_row(const ScalerSet& sc, const Eigen::MatrixXd& x, Eigen::Index row) {
    Eigen::VectorXd out(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        out(j) = sc.features.transform(static_cast<std::size_t>(j), x(row, j));
    return out;
}

inline double predict(const RidgeModel& m, const WindowedSample& w) {
    if (w.x.rows() != 1) throw ShapeMismatchError("ridge predict expects p = 0 windows");
    return m.scaler.unscale_target(ridge_predict(m, scale_row(m.scaler, w.x, 0)));
}

inline double predict(const MlpModel& m, const WindowedSample& w) {
    if (w.x.rows() != 1) throw ShapeMismatchError("mlp predict expects p = 0 windows");
    return m.scaler.unscale_target(mlp_forward(m, scale_row(m.scaler, w.x, 0)));
}

inline double predict(const LstmModel& m, const WindowedSample& w) {
    Eigen::MatrixXd xs(w.x.rows(), w.x.cols());
    for (Eigen::Index t = 0; t < w.x.rows(); ++t) xs.row(t) = scale_row(m.scaler, w.x, t).transpose();
    return m.scaler.unscale_target(lstm_forward(m, xs));
}

// Fits a ridge model on p = 0 windows in scaled space.
inline RidgeModel ridge_fit_windows(const std::vector<WindowedSample>& windows,
                                    const FeatureSet& fs, const ScalerSet& sc, double alpha) {
    const DenseData d = prepare_dense(windows, sc);
    RidgeModel m = ridge_fit(d.x.transpose(), d.y.transpose(), alpha);
    m.feature_set = fs;
    m.scaler = sc;
    return m;
}

}  // namespace wellsense
