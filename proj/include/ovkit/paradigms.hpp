#pragma once

#include "ovkit/model.hpp"

namespace ovkit {

/// Training examples of one class, kept in arrival order.
struct ClassExamples {
    ClassId class_id = 0;
    std::vector<std::vector<double>> features;

    bool operator==(const ClassExamples&) const = default;
};

/// Class-partitioned training data; element order is the class insertion order
/// used to build models.
using ClassOrderedData = std::vector<ClassExamples>;

/// Partitions a dataset by class following `order`. Classes missing from the
/// dataset are skipped; classes not listed in `order` are appended afterwards
/// in ascending id order.
ClassOrderedData group_by_class(const LabeledDataset& data, std::span<const ClassId> order = {});

/// A classifier is "similar" to a batch of examples when it classifies
/// strictly more than lambda_sim * examples.size() of them as positive.
/// The dummy classifier is similar to everything (for lambda_sim < 1).
bool is_similar(const BinaryClassifier& classifier,
                const std::vector<std::vector<double>>& examples, double lambda_sim);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------
// All trainers require at least two classes, each with at least one example,
// and build entries in the order the classes appear in `data`.

/// One classifier per class against all other classes.
ParadigmModel train_ovr(const ClassOrderedData& data, const HyperParams& hp);

/// Each class trains only against the classes found similar to it; earlier
/// classifiers are retrained immediately when a new class joins their
/// similar set. Classes with nothing similar get the dummy classifier.
ParadigmModel train_scl(const ClassOrderedData& data, const HyperParams& hp);

/// Each class trains against all previously inserted classes; the first class
/// gets the dummy classifier. Nothing is ever retrained.
ParadigmModel train_ovp(const ClassOrderedData& data, const HyperParams& hp);

/// Like train_ovp but each class trains only against the previously inserted
/// classes similar to it, and records the others as impossible ("cannot be")
/// when it fires. Nothing is ever retrained.
ParadigmModel train_ovpsc(const ClassOrderedData& data, const HyperParams& hp);

ParadigmModel train_paradigm(Paradigm paradigm, const ClassOrderedData& data,
                             const HyperParams& hp);

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

ClassId predict_ovr(const ParadigmModel& model, std::span<const double> x);
ClassId predict_scl(const ParadigmModel& model, std::span<const double> x);
ClassId predict_ovp(const ParadigmModel& model, std::span<const double> x);
ClassId predict_ovpsc(const ParadigmModel& model, std::span<const double> x);

/// Dispatches on model.paradigm.
ClassId predict(const ParadigmModel& model, std::span<const double> x);

std::vector<ClassId> predict_all(const ParadigmModel& model, const LabeledDataset& data);

// ---------------------------------------------------------------------------
// Incremental updates
// ---------------------------------------------------------------------------

struct UpdateResult {
    ParadigmModel model;
    double seconds = 0.0; ///< wall-clock time of the model update itself
};

/// Starting point for class-by-class model growth: one class carried by the
/// dummy classifier, which is what every trainer would produce for a lone
/// first class.
ParadigmModel single_class_model(Paradigm paradigm, ClassId class_id, const HyperParams& hp);

/// Inserts a new class into an existing model. `existing_data` must hold the
/// training examples of the classes already in the model, in build order;
/// paradigms that retrain previous classifiers read from it. Throws
/// DuplicateClass when the class already exists.
UpdateResult add_class(const ParadigmModel& model, ClassId class_id,
                       const std::vector<std::vector<double>>& examples,
                       const ClassOrderedData& existing_data, const HyperParams& hp);

enum class UpdateStrategy {
    RetrainScratch,   ///< rebuild the whole model from accumulated data
    FineTuneNewOnly,  ///< warm-started refits on the new batch alone
    FineTuneAll,      ///< warm-started refits on accumulated data
};

/// Folds a batch of additional examples for known classes into the model.
/// `new_data` classes must already exist in the model; `accumulated_data` is
/// all data seen so far (including the new batch) in model build order.
/// Similarity structure (similar / cannot_be sets) is kept frozen; only
/// classifiers are refit.
UpdateResult update_with_data(const ParadigmModel& model, const ClassOrderedData& new_data,
                              const ClassOrderedData& accumulated_data, UpdateStrategy strategy,
                              const HyperParams& hp);

namespace diag {

/// Times the fallback in the similarity-pruned prediction rule was taken
/// because every candidate class had been ruled out.
std::uint64_t scl_prediction_fallbacks();
void reset_scl_prediction_fallbacks();

} // namespace diag

} // namespace ovkit
