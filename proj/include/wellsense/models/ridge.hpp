// Ridge regression solved exactly by the normal equations, with the bias
// left out of the penalty. Training is fully deterministic: repeated fits
// carry zero run-to-run variance.
#pragma once

#include <Eigen/Dense>

#include "wellsense/conditioning.hpp"
#include "wellsense/models/common.hpp"

namespace wellsense {

struct RidgeModel {
    FeatureSet feature_set;
    ScalerSet scaler;
    Eigen::VectorXd w;
    double b = 0.0;
    double alpha = 0.0;
};

// Minimizes sum_i (y_i - (w.x_i + b))^2 + alpha * |w|^2 over (w, b).
// Centering eliminates the unpenalized bias, leaving the n x n system
// (Xc'Xc + alpha I) w = Xc'yc; b = mean(y) - w.mean(x).
inline void ridge_fit_raw(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                          Eigen::VectorXd& w_out, double& b_out) {
    if (x.rows() == 0) throw TooFewSamplesError("ridge_fit: no rows");
    if (x.rows() != y.size()) throw LengthMismatchError("ridge_fit: X/y size mismatch");
    if (alpha < 0) throw InvalidConfigError("ridge_fit: alpha must be >= 0");

    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd xc = x.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    if (alpha == 0.0) {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
        if (qr.rank() < x.cols())
            throw SingularSystemError("ridge_fit: rank-deficient system with alpha = 0");
        w_out = qr.solve(yc);
    } else {
        Eigen::MatrixXd a = xc.transpose() * xc;
        a.diagonal().array() += alpha;
        w_out = a.ldlt().solve(xc.transpose() * yc);
    }
    b_out = y_mean - x_mean.dot(w_out);
}

inline RidgeModel ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha) {
    RidgeModel m;
    m.alpha = alpha;
    ridge_fit_raw(x, y, alpha, m.w, m.b);
    return m;
}

// Prediction on an already-scaled feature vector.
inline double ridge_predict(const RidgeModel& m, const Eigen::VectorXd& x) {
    if (x.size() != m.w.size()) throw ShapeMismatchError("ridge_predict: dimension mismatch");
    return m.w.dot(x) + m.b;
}

// Gradient of the ridge objective at (w, b); used by the residual-gradient
// invariant and the gradient checker.
inline Eigen::VectorXd ridge_objective_grad(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                            double alpha, const Eigen::VectorXd& w, double b) {
    const Eigen::VectorXd r = ((y - x * w).array() - b).matrix();  // residuals
    Eigen::VectorXd g(w.size() + 1);
    g.head(w.size()) = -2.0 * (x.transpose() * r) + 2.0 * alpha * w;
    g(w.size()) = -2.0 * r.sum();
    return g;
}

inline double ridge_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                              const Eigen::VectorXd& w, double b) {
    const Eigen::VectorXd r = ((y - x * w).array() - b).matrix();
    return r.squaredNorm() + alpha * w.squaredNorm();
}

}  // namespace wellsense
