#include "ovkit/classifiers.hpp"

#include <atomic>

namespace ovkit {

namespace {

std::atomic<std::uint64_t> g_fit_calls{0};

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace

double BinaryClassifier::confidence(std::span<const double> x) const {
    if (const auto* lin = std::get_if<LogisticClassifier>(&model_)) {
        if (x.size() != lin->weights.size()) {
            throw DimensionMismatch("input of dimension " + std::to_string(x.size()) +
                                    " scored by model of dimension " +
                                    std::to_string(lin->weights.size()));
        }
        return dot(lin->weights, x) + lin->bias;
    }
    if (const auto* svm = std::get_if<SvmRbfClassifier>(&model_)) {
        if (x.size() != svm->support_vectors.cols) {
            throw DimensionMismatch("input of dimension " + std::to_string(x.size()) +
                                    " scored by model of dimension " +
                                    std::to_string(svm->support_vectors.cols));
        }
        double s = svm->bias;
        for (std::size_t k = 0; k < svm->support_vectors.rows; ++k) {
            s += svm->dual_coeffs[k] *
                 std::exp(-svm->gamma * squared_distance(svm->support_vectors.row(k), x));
        }
        return s;
    }
    return std::numeric_limits<double>::max();
}

BinaryClassifier fit_binary(const Matrix& X, std::span<const int> y, const HyperParams& hp,
                            const BinaryClassifier* warm_from, const FitControls& controls,
                            FitInfo* info) {
    switch (hp.base_kind) {
    case BaseKind::LogisticRegression:
        return fit_logistic(X, y, hp, warm_from, controls, info);
    case BaseKind::SvmRbf:
        return fit_svm_rbf(X, y, hp, warm_from, controls, info);
    }
    throw InvalidArgument("unhandled base classifier kind");
}

namespace diag {

std::uint64_t fit_calls() { return g_fit_calls.load(); }
void reset_fit_calls() { g_fit_calls.store(0); }

} // namespace diag

namespace detail {

// Shared by the concrete solvers.
void count_fit_call() { g_fit_calls.fetch_add(1); }

void check_binary_problem(const Matrix& X, std::span<const int> y) {
    if (X.rows == 0) {
        throw EmptyInput("cannot train on an empty example matrix");
    }
    if (y.size() != X.rows) {
        throw LengthMismatch("label vector of length " + std::to_string(y.size()) +
                             " for " + std::to_string(X.rows) + " examples");
    }
    bool has_pos = false;
    bool has_neg = false;
    for (int label : y) {
        if (label == 1) {
            has_pos = true;
        } else if (label == -1) {
            has_neg = true;
        } else {
            throw InvalidArgument("binary labels must be -1 or +1");
        }
    }
    if (!has_pos || !has_neg) {
        throw SingleClassInput("binary training set must contain both classes");
    }
}

} // namespace detail

} // namespace ovkit
