#pragma once

#include "ovkit/classifiers.hpp"
#include "ovkit/core.hpp"

namespace ovkit {

/// One class inside a multi-class model: its binary classifier, the classes it
/// was trained against or found similar to, and the hyperparameters used for
/// its most recent fit.
struct ClassEntry {
    ClassId class_id = 0;
    BinaryClassifier classifier;
    std::set<ClassId> similar;    ///< classes this classifier separates from
    std::set<ClassId> cannot_be;  ///< classes ruled out when this one fires
    HyperParams hyperparams;

    bool operator==(const ClassEntry&) const = default;
};

/// Multi-class model as an ordered list of per-class entries. Entry order is
/// the build (insertion) order, which the prediction rules depend on.
struct ParadigmModel {
    Paradigm paradigm = Paradigm::OvR;
    std::vector<ClassEntry> entries;
    double lambda_sim = 0.02;
    std::vector<std::string> label_names; ///< optional id -> original label

    std::size_t class_count() const { return entries.size(); }
    bool contains(ClassId id) const { return find(id) != nullptr; }

    const ClassEntry* find(ClassId id) const;
    ClassEntry* find(ClassId id);

    /// Position of a class in build order; throws UnknownClass when absent.
    std::size_t position_of(ClassId id) const;

    /// Checks structural invariants: unique class ids, per-paradigm shape of
    /// the similar / cannot_be sets, and that referenced ids exist.
    void validate() const;

    bool operator==(const ParadigmModel&) const = default;
};

} // namespace ovkit
