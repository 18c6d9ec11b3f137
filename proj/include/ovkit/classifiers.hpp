#pragma once

#include "ovkit/core.hpp"

#include <cstdint>
#include <limits>
#include <variant>

namespace ovkit {

/// Classifier that reports the highest possible positive confidence for every
/// input. Used as the stand-in model for a class trained with no opposing
/// examples.
struct DummyClassifier {
    bool operator==(const DummyClassifier&) const = default;
};

struct LogisticClassifier {
    std::vector<double> weights;
    double bias = 0.0;

    bool operator==(const LogisticClassifier&) const = default;
};

struct SvmRbfClassifier {
    Matrix support_vectors;           ///< one row per support vector
    std::vector<double> dual_coeffs;  ///< alpha_i * y_i per support vector
    double bias = 0.0;
    double gamma = 1.0;

    bool operator==(const SvmRbfClassifier&) const = default;
};

/// Binary decision function with a signed real-valued confidence. Positive
/// confidence (strictly greater than zero) means the positive class.
class BinaryClassifier {
public:
    using Model = std::variant<DummyClassifier, LogisticClassifier, SvmRbfClassifier>;

    BinaryClassifier() : model_(DummyClassifier{}) {}
    explicit BinaryClassifier(Model model) : model_(std::move(model)) {}

    static BinaryClassifier dummy() { return BinaryClassifier{}; }

    /// Signed score: logistic margin w.x + b, SVM decision value, or
    /// numeric_limits<double>::max() for the dummy model.
    double confidence(std::span<const double> x) const;

    bool classifies_positive(std::span<const double> x) const {
        return confidence(x) > 0.0;
    }

    bool is_dummy() const { return std::holds_alternative<DummyClassifier>(model_); }
    const Model& model() const { return model_; }

    bool operator==(const BinaryClassifier&) const = default;

private:
    Model model_;
};

/// Solver tolerances and iteration caps.
struct FitControls {
    double logistic_grad_tol = 1e-4;   ///< stop when ||gradient||_2 <= this
    int logistic_max_iter = 200;       ///< Newton iterations
    double svm_kkt_tol = 1e-3;         ///< maximal KKT violation allowed at exit
    std::int64_t svm_max_iter = 1'000'000; ///< SMO pair updates before giving up
};

struct FitInfo {
    std::int64_t iterations = 0;  ///< Newton steps or SMO pair updates
    double final_residual = 0.0;  ///< gradient norm or KKT gap at exit
};

/// Trains an L2-regularized logistic regression on rows of X with labels
/// y in {-1, +1}. Objective: 0.5*||w||^2 + C * sum_i log(1 + exp(-y_i (w.x_i + b)))
/// with the bias unpenalized. `warm_from` (when it holds a logistic model of
/// matching dimension) provides the starting point; otherwise starts at zero.
BinaryClassifier fit_logistic(const Matrix& X, std::span<const int> y, const HyperParams& hp,
                              const BinaryClassifier* warm_from = nullptr,
                              const FitControls& controls = {}, FitInfo* info = nullptr);

/// Trains a soft-margin C-SVM with RBF kernel k(a,b) = exp(-gamma*||a-b||^2)
/// by sequential minimal optimization on the dual. `warm_from` seeds dual
/// coefficients for training points that exactly match an old support vector.
BinaryClassifier fit_svm_rbf(const Matrix& X, std::span<const int> y, const HyperParams& hp,
                             const BinaryClassifier* warm_from = nullptr,
                             const FitControls& controls = {}, FitInfo* info = nullptr);

/// Dispatches to fit_logistic or fit_svm_rbf on hp.base_kind.
BinaryClassifier fit_binary(const Matrix& X, std::span<const int> y, const HyperParams& hp,
                            const BinaryClassifier* warm_from = nullptr,
                            const FitControls& controls = {}, FitInfo* info = nullptr);

/// Regularized logistic objective value at (weights, bias); optionally fills
/// the analytic gradient. Exposed for solver verification.
double logistic_objective(const Matrix& X, std::span<const int> y, double c_reg,
                          std::span<const double> weights, double bias,
                          std::vector<double>* grad_w = nullptr, double* grad_b = nullptr);

namespace diag {

/// Number of base-classifier training calls since the last reset. Paradigm
/// cost comparisons in tests count fits through this.
std::uint64_t fit_calls();
void reset_fit_calls();

} // namespace diag

} // namespace ovkit
