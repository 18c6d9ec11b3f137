#include "ovkit/core.hpp"

#include <algorithm>
#include <cctype>

namespace ovkit {

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

std::string to_string(BaseKind kind) {
    switch (kind) {
    case BaseKind::LogisticRegression: return "LR";
    case BaseKind::SvmRbf: return "SVM";
    }
    return "?";
}

std::string to_string(Paradigm paradigm) {
    switch (paradigm) {
    case Paradigm::OvR: return "OvR";
    case Paradigm::SCL: return "SCL";
    case Paradigm::OvP: return "OvP";
    case Paradigm::OvPSC: return "OvPSC";
    }
    return "?";
}

BaseKind parse_base_kind(const std::string& text) {
    const std::string t = lowercase(text);
    if (t == "lr" || t == "logistic" || t == "logistic_regression") {
        return BaseKind::LogisticRegression;
    }
    if (t == "svm" || t == "svm_rbf" || t == "rbf") {
        return BaseKind::SvmRbf;
    }
    throw InvalidArgument("unknown base classifier kind: '" + text + "'");
}

Paradigm parse_paradigm(const std::string& text) {
    const std::string t = lowercase(text);
    if (t == "ovr") return Paradigm::OvR;
    if (t == "scl") return Paradigm::SCL;
    if (t == "ovp") return Paradigm::OvP;
    if (t == "ovpsc") return Paradigm::OvPSC;
    throw InvalidArgument("unknown paradigm: '" + text + "'");
}

void Matrix::push_row(std::span<const double> r) {
    if (rows == 0 && cols == 0) {
        cols = r.size();
    }
    if (r.size() != cols) {
        throw DimensionMismatch("matrix row of length " + std::to_string(r.size()) +
                                " appended to matrix with " + std::to_string(cols) + " columns");
    }
    values.insert(values.end(), r.begin(), r.end());
    ++rows;
}

void HyperParams::validate() const {
    if (!(c_reg > 0.0) || !std::isfinite(c_reg)) {
        throw InvalidArgument("regularization constant must be positive and finite");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgument("rbf gamma must be positive and finite");
    }
    if (!(lambda_sim >= 0.0) || !(lambda_sim <= 1.0)) {
        throw InvalidArgument("similarity threshold must lie in [0, 1]");
    }
}

void LabeledDataset::add(LabeledExample example) {
    if (example.features.empty()) {
        throw DimensionMismatch("example with no features");
    }
    if (!empty() && example.features.size() != dimension()) {
        throw DimensionMismatch("example with " + std::to_string(example.features.size()) +
                                " features added to dataset of dimension " +
                                std::to_string(dimension()));
    }
    for (double v : example.features) {
        if (!std::isfinite(v)) {
            throw NonNumericFeature("non-finite feature value rejected at ingestion");
        }
    }
    class_index_[example.label].push_back(examples_.size());
    examples_.push_back(std::move(example));
}

std::vector<ClassId> LabeledDataset::class_ids() const {
    std::vector<ClassId> ids;
    ids.reserve(class_index_.size());
    for (const auto& [id, _] : class_index_) {
        ids.push_back(id);
    }
    return ids;
}

std::string LabeledDataset::name_of(ClassId id) const {
    if (id < label_names_.size() && !label_names_[id].empty()) {
        return label_names_[id];
    }
    return std::to_string(id);
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> positions) const {
    LabeledDataset out;
    out.label_names_ = label_names_;
    for (std::size_t p : positions) {
        out.add(examples_.at(p));
    }
    return out;
}

LabeledDataset LabeledDataset::filter_classes(const std::set<ClassId>& keep) const {
    LabeledDataset out;
    out.label_names_ = label_names_;
    for (const auto& ex : examples_) {
        if (keep.count(ex.label) != 0) {
            out.add(ex);
        }
    }
    return out;
}

} // namespace ovkit
