#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "citywell/error.hpp"
#include "citywell/log.hpp"
#include "citywell/rng.hpp"

namespace citywell {

struct SmoteResult {
    Eigen::MatrixXd synthetic;          // one synthetic minority row each
    std::vector<int> base_index;        // minority row the sample grew from
    std::vector<int> neighbor_index;    // minority row it interpolated toward
    std::vector<double> lambda;
    int k_used = 0;
};

// Classic SMOTE on the minority rows only: pick a random minority point, pick
// one of its k nearest minority neighbors, emit a uniform point on the
// connecting segment. The provenance vectors exist so callers can verify the
// segment property.
inline SmoteResult smote(const Eigen::MatrixXd& minority, int k, int n_synthetic, uint64_t seed) {
    const int n = static_cast<int>(minority.rows());
    if (n < 2) throw InputError("smote needs at least 2 minority rows, got " + std::to_string(n));
    if (n_synthetic < 0) throw InputError("smote synthetic count must be >= 0");
    if (k < 1) throw InputError("smote k must be >= 1");
    if (k > n - 1) {
        log::warn("smote: k=" + std::to_string(k) + " reduced to " + std::to_string(n - 1) +
                  " (only " + std::to_string(n) + " minority rows)");
        k = n - 1;
    }

    // k nearest by Euclidean distance, ties broken by row order
    std::vector<std::vector<int>> nearest(static_cast<size_t>(n));
    std::vector<std::pair<double, int>> dist(static_cast<size_t>(n - 1));
    for (int i = 0; i < n; ++i) {
        dist.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            dist.emplace_back((minority.row(i) - minority.row(j)).squaredNorm(), j);
        }
        std::stable_sort(dist.begin(), dist.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        auto& nn = nearest[static_cast<size_t>(i)];
        for (int t = 0; t < k; ++t) nn.push_back(dist[static_cast<size_t>(t)].second);
    }

    SmoteResult out;
    out.k_used = k;
    out.synthetic.resize(n_synthetic, minority.cols());
    out.base_index.reserve(static_cast<size_t>(n_synthetic));
    out.neighbor_index.reserve(static_cast<size_t>(n_synthetic));
    out.lambda.reserve(static_cast<size_t>(n_synthetic));
    Rng rng(seed);
    for (int s = 0; s < n_synthetic; ++s) {
        int i = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
        const auto& nn = nearest[static_cast<size_t>(i)];
        int j = nn[rng.uniform_index(nn.size())];
        double lam = rng.uniform();
        out.synthetic.row(s) = minority.row(i) + lam * (minority.row(j) - minority.row(i));
        out.base_index.push_back(i);
        out.neighbor_index.push_back(j);
        out.lambda.push_back(lam);
    }
    return out;
}

// Balances a binary training set by oversampling whichever class is smaller.
// Returns the augmented X and y; already-balanced input passes through.
inline void smote_balance(Eigen::MatrixXd& X, Eigen::VectorXd& y, int k, uint64_t seed) {
    int n1 = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) n1 += y[i] > 0.5 ? 1 : 0;
    int n0 = static_cast<int>(y.size()) - n1;
    if (n0 == n1) return;
    double minority_label = n1 < n0 ? 1.0 : 0.0;
    int n_minority = std::min(n0, n1);
    int deficit = std::abs(n0 - n1);

    Eigen::MatrixXd minority(n_minority, X.cols());
    int r = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] == minority_label) minority.row(r++) = X.row(i);

    SmoteResult extra = smote(minority, k, deficit, seed);
    Eigen::MatrixXd X2(X.rows() + deficit, X.cols());
    Eigen::VectorXd y2(y.size() + deficit);
    X2.topRows(X.rows()) = X;
    y2.head(y.size()) = y;
    X2.bottomRows(deficit) = extra.synthetic;
    y2.tail(deficit).setConstant(minority_label);
    X = std::move(X2);
    y = std::move(y2);
}

}  // namespace citywell
