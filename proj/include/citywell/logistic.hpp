#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "citywell/error.hpp"

namespace citywell {

// L2-penalized logistic regression. Weights maximize
//   sum_i log p(y_i | x_i) - (l2/2) * ||w||^2
// with the intercept left unpenalized.
struct LogisticConfig {
    double l2 = 1.0;
    double tol = 1e-8;       // gradient max-norm stopping rule
    int max_iter = 200;
};

struct LogisticModel {
    Eigen::VectorXd weights;  // per feature
    double intercept = 0.0;
    std::vector<double> loglik_trace;  // penalized, one entry per iteration

    double decision(const Eigen::VectorXd& x) const { return weights.dot(x) + intercept; }
    double probability(const Eigen::VectorXd& x) const {
        return 1.0 / (1.0 + std::exp(-decision(x)));
    }
};

namespace detail {

inline double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& w, double b, double l2) {
    Eigen::VectorXd z = X * w;
    z.array() += b;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        // log sigmoid(z) = -log1p(exp(-z)), stable on both tails
        double zi = y[i] > 0.5 ? z[i] : -z[i];
        ll += zi >= 0 ? -std::log1p(std::exp(-zi)) : zi - std::log1p(std::exp(zi));
    }
    return ll - 0.5 * l2 * w.squaredNorm();
}

// gradient of the penalized log-likelihood in (w, b); last entry is d/db
inline Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& w, double b, double l2) {
    Eigen::VectorXd z = X * w;
    z.array() += b;
    Eigen::VectorXd p(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) p[i] = 1.0 / (1.0 + std::exp(-z[i]));
    Eigen::VectorXd r = y - p;
    Eigen::VectorXd grad(w.size() + 1);
    grad.head(w.size()) = X.transpose() * r - l2 * w;
    grad[w.size()] = r.sum();
    return grad;
}

}  // namespace detail

inline LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const LogisticConfig& config = {}) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (y.size() != n) throw InputError("label count does not match row count");
    if (config.l2 < 0) throw InputError("l2 must be >= 0");
    for (Eigen::Index i = 0; i < n; ++i)
        if (y[i] != 0.0 && y[i] != 1.0) throw InputError("labels must be 0 or 1");
    if (!X.allFinite()) throw InputError("feature matrix contains non-finite values");

    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    LogisticModel model;
    double ll = detail::logistic_loglik(X, y, w, b, config.l2);
    model.loglik_trace.push_back(ll);

    for (int iter = 0; iter < config.max_iter; ++iter) {
        Eigen::VectorXd grad = detail::logistic_gradient(X, y, w, b, config.l2);
        if (grad.cwiseAbs().maxCoeff() <= config.tol) break;

        // Newton direction on the (d+1)-dim Hessian; small ridge keeps it
        // invertible when classes separate
        Eigen::VectorXd z = X * w;
        z.array() += b;
        Eigen::VectorXd s(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double p = 1.0 / (1.0 + std::exp(-z[i]));
            s[i] = std::max(p * (1.0 - p), 1e-10);
        }
        Eigen::MatrixXd H(d + 1, d + 1);
        Eigen::MatrixXd Xs = s.asDiagonal() * X;
        H.topLeftCorner(d, d) = X.transpose() * Xs;
        for (Eigen::Index j = 0; j < d; ++j) H(j, j) += config.l2;
        H.topRightCorner(d, 1) = X.transpose() * s;
        H.bottomLeftCorner(1, d) = H.topRightCorner(d, 1).transpose();
        H(d, d) = s.sum();
        H.diagonal().array() += 1e-12;

        Eigen::VectorXd step = H.ldlt().solve(grad);
        if (!step.allFinite()) throw NumericError("logistic Newton step is not finite");

        // backtracking keeps the penalized log-likelihood monotone
        double alpha = 1.0;
        bool accepted = false;
        for (int half = 0; half < 60 && !accepted; ++half) {
            Eigen::VectorXd w_try = w + alpha * step.head(d);
            double b_try = b + alpha * step[d];
            double ll_try = detail::logistic_loglik(X, y, w_try, b_try, config.l2);
            if (ll_try >= ll) {
                w = w_try;
                b = b_try;
                ll = ll_try;
                accepted = true;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            throw NumericError("logistic line search failed to improve at iteration " +
                               std::to_string(iter) + ", loglik " + std::to_string(ll));
        }
        model.loglik_trace.push_back(ll);
    }

    if (!w.allFinite() || !std::isfinite(b)) throw NumericError("logistic fit produced non-finite weights");
    model.weights = std::move(w);
    model.intercept = b;
    return model;
}

}  // namespace citywell
