// Finite-difference verification of the analytic gradients. Central
// differences over every parameter, dropout disabled. The reported figure
// is the worst per-parameter relative discrepancy; tiny gradients fall back
// to the absolute difference so roundoff near zero cannot mask real bugs.
#pragma once

#include <Eigen/Dense>

#include "wellsense/models/lstm.hpp"
#include "wellsense/models/mlp.hpp"
#include "wellsense/models/ridge.hpp"

namespace wellsense {

namespace detail {

inline double rel_err(double analytic, double numeric) {
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    const double diff = std::abs(analytic - numeric);
    return denom < 1e-4 ? diff : diff / denom;
}

inline void check_epsilon(double eps) {
    if (eps < 1e-7 || eps > 1e-4)
        throw InvalidConfigError("grad_check: epsilon must be in [1e-7, 1e-4]");
}

template <class LossFn>
double max_grad_err(Eigen::VectorXd& theta, const Eigen::VectorXd& analytic, LossFn&& loss_of,
                    double eps) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double saved = theta(i);
        theta(i) = saved + eps;
        const double up = loss_of();
        theta(i) = saved - eps;
        const double down = loss_of();
        theta(i) = saved;
        const double numeric = (up - down) / (2.0 * eps);
        worst = std::max(worst, rel_err(analytic(i), numeric));
    }
    return worst;
}

}  // namespace detail

inline double grad_check(DenseCore& core, const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y,
                         const LossContext& ctx, double eps = 1e-5) {
    detail::check_epsilon(eps);
    Eigen::VectorXd analytic;
    core.loss_grad(x, y, ctx, nullptr, analytic);
    auto loss_of = [&] { return ctx.value(core.forward(x), y); };
    return detail::max_grad_err(core.theta, analytic, loss_of, eps);
}

inline double grad_check(LstmCore& core, const std::vector<Eigen::MatrixXd>& xs,
                         const Eigen::RowVectorXd& y, const LossContext& ctx, double eps = 1e-5) {
    detail::check_epsilon(eps);
    Eigen::VectorXd analytic;
    core.loss_grad(xs, y, ctx, nullptr, analytic);
    auto loss_of = [&] { return ctx.value(core.forward(xs), y); };
    return detail::max_grad_err(core.theta, analytic, loss_of, eps);
}

// Ridge objective gradient at (w, b) against central differences.
inline double grad_check_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                               const Eigen::VectorXd& w, double b, double eps = 1e-5) {
    detail::check_epsilon(eps);
    Eigen::VectorXd params(w.size() + 1);
    params.head(w.size()) = w;
    params(w.size()) = b;
    const Eigen::VectorXd analytic = ridge_objective_grad(x, y, alpha, w, b);
    auto loss_of = [&] {
        return ridge_objective(x, y, alpha, params.head(w.size()), params(w.size()));
    };
    return detail::max_grad_err(params, analytic, loss_of, eps);
}

}  // namespace wellsense
