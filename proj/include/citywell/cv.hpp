#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "citywell/error.hpp"
#include "citywell/log.hpp"
#include "citywell/logistic.hpp"
#include "citywell/rng.hpp"
#include "citywell/smote.hpp"
#include "citywell/stats.hpp"

namespace citywell {

struct ScaledFold {
    Eigen::MatrixXd train;
    Eigen::MatrixXd test;
    std::vector<int> kept_columns;  // original indices of surviving columns
    Eigen::VectorXd col_min;
    Eigen::VectorXd col_max;
};

// Min-max scaling fitted on the training rows only; test rows are mapped with
// the train bounds and clipped into [0,1]. Train-constant columns carry no
// information for this fold and are dropped.
inline ScaledFold minmax_scale(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test) {
    if (test.cols() != train.cols()) throw InputError("train/test column mismatch");
    std::vector<int> kept;
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
        double lo = train.col(j).minCoeff();
        double hi = train.col(j).maxCoeff();
        if (hi > lo) kept.push_back(static_cast<int>(j));
    }
    if (kept.empty()) throw InputError("all feature columns are constant on the training rows");
    if (static_cast<Eigen::Index>(kept.size()) < train.cols())
        log::warn("minmax_scale: dropped " +
                  std::to_string(train.cols() - static_cast<Eigen::Index>(kept.size())) +
                  " constant column(s)");

    ScaledFold fold;
    fold.kept_columns = kept;
    fold.col_min.resize(static_cast<Eigen::Index>(kept.size()));
    fold.col_max.resize(static_cast<Eigen::Index>(kept.size()));
    fold.train.resize(train.rows(), static_cast<Eigen::Index>(kept.size()));
    fold.test.resize(test.rows(), static_cast<Eigen::Index>(kept.size()));
    for (size_t c = 0; c < kept.size(); ++c) {
        Eigen::Index j = kept[c];
        double lo = train.col(j).minCoeff();
        double hi = train.col(j).maxCoeff();
        fold.col_min[static_cast<Eigen::Index>(c)] = lo;
        fold.col_max[static_cast<Eigen::Index>(c)] = hi;
        fold.train.col(static_cast<Eigen::Index>(c)) = (train.col(j).array() - lo) / (hi - lo);
        fold.test.col(static_cast<Eigen::Index>(c)) =
            ((test.col(j).array() - lo) / (hi - lo)).cwiseMax(0.0).cwiseMin(1.0);
    }
    return fold;
}

struct FoldRecord {
    int held_out = 0;
    double probability = 0.0;
    int predicted = 0;
    int actual = 0;
};

struct CVReport {
    double accuracy = 0;
    double precision_macro = 0;
    double recall_macro = 0;
    double f1_macro = 0;
    double auc = 0;
    Eigen::VectorXd mean_coefficients;  // full feature dimension; dropped columns average as 0
    double mean_intercept = 0;
    std::vector<FoldRecord> folds;
};

struct CVConfig {
    LogisticConfig logistic;
    int smote_k = 5;
    uint64_t seed = 0;
};

// Leave-one-out over rows. Each fold scales on its own training split, then
// SMOTE-balances it, fits, and scores the single held-out row; metrics come
// from the pooled held-out predictions. Fold seeds derive from (seed, fold) so
// any evaluation order gives the same report.
inline CVReport loo_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const CVConfig& config = {}) {
    const int n = static_cast<int>(X.rows());
    if (n < 4) throw InputError("loo_cv needs at least 4 rows");
    int n1 = 0;
    for (int i = 0; i < n; ++i) n1 += y[i] > 0.5 ? 1 : 0;
    if (n1 < 2 || n - n1 < 2) throw InputError("loo_cv needs at least 2 rows per class");

    CVReport report;
    report.mean_coefficients = Eigen::VectorXd::Zero(X.cols());
    std::vector<int> labels;
    std::vector<int> preds;
    std::vector<double> probs;
    for (int fold = 0; fold < n; ++fold) {
        Eigen::MatrixXd train(n - 1, X.cols());
        Eigen::VectorXd train_y(n - 1);
        int r = 0;
        for (int i = 0; i < n; ++i) {
            if (i == fold) continue;
            train.row(r) = X.row(i);
            train_y[r] = y[i];
            ++r;
        }
        ScaledFold scaled = minmax_scale(train, X.row(fold));
        Eigen::MatrixXd fit_X = scaled.train;
        Eigen::VectorXd fit_y = train_y;
        smote_balance(fit_X, fit_y, config.smote_k, mix_seed(config.seed, static_cast<uint64_t>(fold)));
        LogisticModel model = fit_logistic(fit_X, fit_y, config.logistic);

        double p = model.probability(scaled.test.row(0).transpose());
        FoldRecord rec;
        rec.held_out = fold;
        rec.probability = p;
        rec.predicted = p >= 0.5 ? 1 : 0;
        rec.actual = y[fold] > 0.5 ? 1 : 0;
        report.folds.push_back(rec);
        labels.push_back(rec.actual);
        preds.push_back(rec.predicted);
        probs.push_back(p);

        for (size_t c = 0; c < scaled.kept_columns.size(); ++c)
            report.mean_coefficients[scaled.kept_columns[c]] +=
                model.weights[static_cast<Eigen::Index>(c)];
        report.mean_intercept += model.intercept;
    }
    report.mean_coefficients /= static_cast<double>(n);
    report.mean_intercept /= static_cast<double>(n);

    stats::BinaryMetrics bm = stats::binary_metrics(labels, preds);
    report.accuracy = bm.accuracy;
    report.precision_macro = bm.precision_macro;
    report.recall_macro = bm.recall_macro;
    report.f1_macro = bm.f1_macro;
    report.auc = stats::auc(labels, probs);
    return report;
}

}  // namespace citywell
