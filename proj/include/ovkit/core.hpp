#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovkit {

/// Dense class identifier assigned at ingestion; original string labels are
/// kept in a side table for reporting.
using ClassId = std::uint32_t;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error { public: using Error::Error; };
class SingleClassInput : public Error { public: using Error::Error; };
class ConvergenceError : public Error { public: using Error::Error; };
class DuplicateClass : public Error { public: using Error::Error; };
class UnknownClass : public Error { public: using Error::Error; };
class ClassTooSmall : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };
class NonNumericFeature : public Error { public: using Error::Error; };
class EmptyFile : public Error { public: using Error::Error; };
class LengthMismatch : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };
class InvalidArgument : public Error { public: using Error::Error; };

// ---------------------------------------------------------------------------
// Enums
// ---------------------------------------------------------------------------

enum class BaseKind { LogisticRegression, SvmRbf };
enum class Paradigm { OvR, SCL, OvP, OvPSC };

std::string to_string(BaseKind kind);
std::string to_string(Paradigm paradigm);

/// Case-insensitive; accepts "lr", "logistic", "svm", "svm_rbf".
BaseKind parse_base_kind(const std::string& text);
/// Case-insensitive; accepts "ovr", "scl", "ovp", "ovpsc".
Paradigm parse_paradigm(const std::string& text);

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// Minimal dense row-major matrix of doubles.
struct Matrix {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : values(r * c, 0.0), rows(r), cols(c) {}

    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * cols, cols};
    }
    std::span<double> row(std::size_t i) {
        return {values.data() + i * cols, cols};
    }

    /// Appends a row; fixes the column count on first use.
    void push_row(std::span<const double> r);

    bool operator==(const Matrix&) const = default;
};

// ---------------------------------------------------------------------------
// Hyperparameters
// ---------------------------------------------------------------------------

struct HyperParams {
    BaseKind base_kind = BaseKind::LogisticRegression;
    double c_reg = 1.0;       ///< regularization constant C
    double gamma = 1.0;       ///< RBF width; ignored for logistic regression
    double lambda_sim = 0.02; ///< similarity threshold fraction

    /// Throws InvalidArgument unless c_reg > 0, gamma > 0 and lambda_sim in [0,1].
    void validate() const;

    bool operator==(const HyperParams&) const = default;
};

// ---------------------------------------------------------------------------
// Labeled data
// ---------------------------------------------------------------------------

struct LabeledExample {
    std::vector<double> features;
    ClassId label = 0;

    bool operator==(const LabeledExample&) const = default;
};

/// Feature vectors plus integer class labels; maintains a class -> positions
/// index. All examples share one feature dimension; non-finite values are
/// rejected at ingestion.
class LabeledDataset {
public:
    LabeledDataset() = default;

    void add(LabeledExample example);

    std::size_t size() const { return examples_.size(); }
    bool empty() const { return examples_.empty(); }
    std::size_t dimension() const { return empty() ? 0 : examples_.front().features.size(); }

    const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }
    const std::vector<LabeledExample>& examples() const { return examples_; }

    const std::map<ClassId, std::vector<std::size_t>>& class_index() const { return class_index_; }
    std::size_t class_count() const { return class_index_.size(); }
    std::vector<ClassId> class_ids() const;

    /// Original label for a class id; falls back to the decimal id.
    std::string name_of(ClassId id) const;
    void set_label_names(std::vector<std::string> names) { label_names_ = std::move(names); }
    const std::vector<std::string>& label_names() const { return label_names_; }

    /// New dataset holding the examples at the given positions, in order.
    LabeledDataset subset(std::span<const std::size_t> positions) const;

    /// New dataset keeping only examples whose label is in `keep`.
    LabeledDataset filter_classes(const std::set<ClassId>& keep) const;

private:
    std::vector<LabeledExample> examples_;
    std::map<ClassId, std::vector<std::size_t>> class_index_;
    std::vector<std::string> label_names_;
};

} // namespace ovkit
