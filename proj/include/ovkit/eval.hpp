#pragma once

#include "ovkit/data.hpp"
#include "ovkit/paradigms.hpp"

#include <chrono>
#include <utility>

namespace ovkit {

/// Quality and cost of one trained model on one evaluation set.
struct MetricsRow {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double train_seconds = 0.0;

    bool operator==(const MetricsRow&) const = default;
};

/// Fraction of matching entries; throws LengthMismatch on unequal lengths and
/// EmptyInput on empty vectors.
double accuracy(std::span<const ClassId> predictions, std::span<const ClassId> truths);

/// Unweighted mean over the classes present in `truths` of
/// F1 = 2TP / (2TP + FP + FN), with 0/0 counted as zero. A predicted class
/// absent from the truths stays out of the mean; the miss still counts as a
/// false negative for the true class.
double macro_f1(std::span<const ClassId> predictions, std::span<const ClassId> truths);

/// Default RBF width 1 / (dimension * mean per-feature population variance),
/// computed on the given (tuning) data.
double default_gamma(const LabeledDataset& data);

/// Picks the regularization constant by stratified cross-validation on
/// `train`: each candidate C is scored by mean validation accuracy over
/// `folds` folds (same seeded split for every candidate); best wins, ties go
/// to the smaller C. gamma is fixed to default_gamma(train) and lambda to
/// `lambda_sim` throughout. `order` fixes the class insertion order; empty
/// means descending frequency on `train`.
HyperParams grid_search_c(const LabeledDataset& train, Paradigm paradigm, BaseKind base_kind,
                          std::span<const double> grid, std::size_t folds, std::uint64_t seed,
                          double lambda_sim = 0.02, std::span<const ClassId> order = {});

/// Runs a callable and reports wall-clock seconds alongside its result.
template <typename F>
auto timed(F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
        std::forward<F>(fn)();
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
        auto result = std::forward<F>(fn)();
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return std::make_pair(std::move(result), seconds);
    }
}

} // namespace ovkit
