// Shared estimator machinery: activations, losses and their analytic
// gradients, parameter-vector layout, and the training hyperparameters.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wellsense/conditioning.hpp"
#include "wellsense/core.hpp"

namespace wellsense {

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

enum class Activation { ReLU, GELU, ELU, Tanh };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::ReLU: return "ReLU";
        case Activation::GELU: return "GELU";
        case Activation::ELU: return "ELU";
        case Activation::Tanh: return "Tanh";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    for (Activation a : {Activation::ReLU, Activation::GELU, Activation::ELU, Activation::Tanh})
        if (s == activation_name(a)) return a;
    throw InvalidConfigError("unknown activation: " + s);
}

namespace act {

inline double value(Activation a, double z) {
    switch (a) {
        case Activation::ReLU: return z > 0.0 ? z : 0.0;
        case Activation::GELU: return 0.5 * z * (1.0 + std::erf(z * M_SQRT1_2));
        case Activation::ELU: return z > 0.0 ? z : std::expm1(z);
        case Activation::Tanh: return std::tanh(z);
    }
    return 0.0;
}

// Derivative as a function of the pre-activation z.
inline double deriv(Activation a, double z) {
    switch (a) {
        case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
        case Activation::GELU: {
            const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
            return 0.5 * (1.0 + std::erf(z * M_SQRT1_2)) + z * phi;
        }
        case Activation::ELU: return z > 0.0 ? 1.0 : std::exp(z);
        case Activation::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
    }
    return 0.0;
}

inline void apply(Activation a, Eigen::MatrixXd& m) {
    m = m.unaryExpr([a](double z) { return value(a, z); });
}

inline Eigen::MatrixXd deriv_from_pre(Activation a, const Eigen::MatrixXd& z) {
    return z.unaryExpr([a](double v) { return deriv(a, v); });
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace act

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

enum class LossKind { MSE, MAE, SMAPE };

inline const char* loss_kind_name(LossKind k) {
    switch (k) {
        case LossKind::MSE: return "MSE";
        case LossKind::MAE: return "MAE";
        case LossKind::SMAPE: return "SMAPE";
    }
    return "?";
}

inline LossKind loss_kind_from_name(const std::string& s) {
    for (LossKind k : {LossKind::MSE, LossKind::MAE, LossKind::SMAPE})
        if (s == loss_kind_name(k)) return k;
    throw InvalidConfigError("unknown loss: " + s);
}

// Plain losses on value vectors. SMAPE here is the fractional form of the
// symmetric error (x100 gives the reporting metric).
inline double loss(LossKind kind, const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    if (pred.size() != truth.size()) throw LengthMismatchError("loss: length mismatch");
    if (pred.size() == 0) throw LengthMismatchError("loss: empty input");
    const auto n = static_cast<double>(pred.size());
    switch (kind) {
        case LossKind::MSE: return (pred - truth).squaredNorm() / n;
        case LossKind::MAE: return (pred - truth).cwiseAbs().sum() / n;
        case LossKind::SMAPE: {
            double s = 0.0;
            for (Eigen::Index i = 0; i < pred.size(); ++i) {
                const double m = 0.5 * (pred(i) + truth(i));
                if (m == 0.0) throw DomainError("SMAPE: zero denominator");
                s += std::abs(pred(i) - truth(i)) / m;
            }
            return s / n;
        }
    }
    return 0.0;
}

// dLoss/dpred, elementwise analytic.
inline Eigen::VectorXd loss_grad(LossKind kind, const Eigen::VectorXd& pred,
                                 const Eigen::VectorXd& truth) {
    if (pred.size() != truth.size()) throw LengthMismatchError("loss_grad: length mismatch");
    const auto n = static_cast<double>(pred.size());
    Eigen::VectorXd g(pred.size());
    switch (kind) {
        case LossKind::MSE:
            g = 2.0 * (pred - truth) / n;
            break;
        case LossKind::MAE:
            for (Eigen::Index i = 0; i < pred.size(); ++i) {
                const double e = pred(i) - truth(i);
                g(i) = (e > 0 ? 1.0 : e < 0 ? -1.0 : 0.0) / n;
            }
            break;
        case LossKind::SMAPE:
            for (Eigen::Index i = 0; i < pred.size(); ++i) {
                const double e = pred(i) - truth(i);
                const double m = 0.5 * (pred(i) + truth(i));
                if (m == 0.0) throw DomainError("SMAPE: zero denominator");
                const double sgn = e > 0 ? 1.0 : e < 0 ? -1.0 : 0.0;
                g(i) = (sgn * m - 0.5 * std::abs(e)) / (m * m) / n;
            }
            break;
    }
    return g;
}

// Training loss over scaled network outputs. MSE/MAE act on the scaled
// values directly; SMAPE is evaluated on de-normalized pressures (a
// percentage on MinMax-scaled values near zero is numerically meaningless),
// with the affine chain rule folded into the gradient.
struct LossContext {
    LossKind kind = LossKind::MSE;
    const ScalerParams* target = nullptr;  // required for SMAPE

    double value(const Eigen::RowVectorXd& pred, const Eigen::RowVectorXd& y) const {
        if (kind != LossKind::SMAPE) return loss(kind, pred.transpose(), y.transpose());
        return loss(kind, denorm(pred), denorm(y));
    }

    Eigen::RowVectorXd grad(const Eigen::RowVectorXd& pred, const Eigen::RowVectorXd& y) const {
        if (kind != LossKind::SMAPE)
            return loss_grad(kind, pred.transpose(), y.transpose()).transpose();
        const Eigen::VectorXd g = loss_grad(kind, denorm(pred), denorm(y));
        return (slope() * g).transpose();
    }

private:
    Eigen::VectorXd denorm(const Eigen::RowVectorXd& v) const {
        if (!target) throw InvalidConfigError("SMAPE loss needs the target scaler");
        Eigen::VectorXd out(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = target->inverse(0, v(i));
        return out;
    }
    double slope() const {
        const FeatureScale& s = target->per_feature[0];
        return target->kind == ScalerKind::MinMax ? s.b - s.a : s.b;
    }
};

// ---------------------------------------------------------------------------
// Flat parameter vectors
// ---------------------------------------------------------------------------

struct TensorSpec {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    Eigen::Index offset = 0;
};

// All model parameters live in one flat vector; tensors are mapped views.
// This keeps the optimizer, gradient checker, freeze masks and
// serialization independent of the architecture.
struct ParamLayout {
    std::vector<TensorSpec> tensors;
    Eigen::Index size = 0;

    std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
        tensors.push_back({std::move(name), rows, cols, size});
        size += rows * cols;
        return tensors.size() - 1;
    }

    std::size_t index_of(std::string_view name) const {
        for (std::size_t i = 0; i < tensors.size(); ++i)
            if (tensors[i].name == name) return i;
        throw ShapeMismatchError("no tensor named " + std::string(name));
    }

    Eigen::Map<Eigen::MatrixXd> mat(Eigen::VectorXd& theta, std::size_t i) const {
        const TensorSpec& t = tensors[i];
        return {theta.data() + t.offset, t.rows, t.cols};
    }
    Eigen::Map<const Eigen::MatrixXd> mat(const Eigen::VectorXd& theta, std::size_t i) const {
        const TensorSpec& t = tensors[i];
        return {theta.data() + t.offset, t.rows, t.cols};
    }
};

// Uniform fan-in initialization: weights ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in))
// by tensor, biases zero. fan_in is the tensor's column count.
inline void init_fan_in(const ParamLayout& layout, Eigen::VectorXd& theta, Rng& rng) {
    theta.setZero(layout.size);
    for (std::size_t i = 0; i < layout.tensors.size(); ++i) {
        const TensorSpec& t = layout.tensors[i];
        const bool is_bias = !t.name.empty() && (t.name[0] == 'b' || t.name.ends_with("_b"));
        if (is_bias) continue;  // biases stay 0
        const double limit = 1.0 / std::sqrt(static_cast<double>(t.cols));
        auto m = layout.mat(theta, i);
        for (Eigen::Index c = 0; c < t.cols; ++c)
            for (Eigen::Index r = 0; r < t.rows; ++r) m(r, c) = rng.uniform(-limit, limit);
    }
}

// ---------------------------------------------------------------------------
// Training hyperparameters
// ---------------------------------------------------------------------------

struct TrainSpec {
    LossKind loss = LossKind::MSE;
    double learning_rate = 1e-3;
    int epochs = 300;
    int batch_size = 256;
    std::uint64_t seed = 0;
    int early_stop_patience = 20;  // active only when an early-stop set is given
    // Adam moment constants; the paper names only the learning rate.
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        // learning_rate = 0 and epochs = 0 are allowed: both are well-defined
        // null-update schedules that transfer contracts rely on.
        if (learning_rate < 0) throw InvalidConfigError("learning_rate must be >= 0");
        if (epochs < 0) throw InvalidConfigError("epochs must be >= 0");
        if (batch_size < 1) throw InvalidConfigError("batch_size must be >= 1");
    }
};

}  // namespace wellsense
