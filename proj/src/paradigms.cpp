#include "ovkit/paradigms.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>

namespace ovkit {

namespace {

std::atomic<std::uint64_t> g_scl_fallbacks{0};

using ClassPtrs = std::vector<const ClassExamples*>;

ClassPtrs as_ptrs(const ClassOrderedData& data) {
    ClassPtrs ptrs;
    ptrs.reserve(data.size());
    for (const auto& ce : data) {
        ptrs.push_back(&ce);
    }
    return ptrs;
}

struct BinaryProblem {
    Matrix X;
    std::vector<int> y;
};

// Builds a ±1 training problem: positives of `positive` first, then the
// examples of every class accepted by `take_negative`, in `available` order.
// Row order is a function of the class order alone, keeping refits on the
// same classes bit-reproducible.
template <typename Pred>
BinaryProblem make_problem(const ClassPtrs& available, ClassId positive, Pred take_negative) {
    BinaryProblem prob;
    const ClassExamples* pos = nullptr;
    for (const ClassExamples* ce : available) {
        if (ce->class_id == positive) {
            pos = ce;
            break;
        }
    }
    if (pos == nullptr) {
        throw UnknownClass("no examples available for class " + std::to_string(positive));
    }
    for (const auto& row : pos->features) {
        prob.X.push_row(row);
        prob.y.push_back(1);
    }
    for (const ClassExamples* ce : available) {
        if (ce->class_id == positive || !take_negative(ce->class_id)) {
            continue;
        }
        for (const auto& row : ce->features) {
            prob.X.push_row(row);
            prob.y.push_back(-1);
        }
    }
    return prob;
}

void check_training_data(const ClassOrderedData& data, std::size_t min_classes) {
    if (data.empty()) {
        throw EmptyInput("no training classes given");
    }
    if (data.size() < min_classes) {
        throw SingleClassInput("training requires at least " + std::to_string(min_classes) +
                               " classes, got " + std::to_string(data.size()));
    }
    std::set<ClassId> seen;
    std::size_t dim = 0;
    for (const auto& ce : data) {
        if (!seen.insert(ce.class_id).second) {
            throw DuplicateClass("class " + std::to_string(ce.class_id) +
                                 " listed twice in the training data");
        }
        if (ce.features.empty()) {
            throw EmptyInput("class " + std::to_string(ce.class_id) + " has no examples");
        }
        for (const auto& f : ce.features) {
            if (dim == 0) {
                dim = f.size();
            }
            if (f.empty() || f.size() != dim) {
                throw DimensionMismatch("inconsistent feature dimension in class " +
                                        std::to_string(ce.class_id));
            }
        }
    }
}

// Inserts one class per the similarity-learning rule: test against every
// existing classifier in build order; on similarity record the edge on both
// sides and immediately retrain the existing classifier against its enlarged
// similar set; otherwise the new class joins the existing one's ruled-out
// set. The new classifier trains against its similar classes, or becomes the
// dummy when nothing is similar. `available` must cover the model's classes
// plus the incoming one.
void scl_insert(ParadigmModel& model, const ClassPtrs& available, const ClassExamples& incoming,
                const HyperParams& hp) {
    std::set<ClassId> similar_now;
    for (auto& existing : model.entries) {
        if (is_similar(existing.classifier, incoming.features, hp.lambda_sim)) {
            similar_now.insert(existing.class_id);
            existing.similar.insert(incoming.class_id);
            auto prob = make_problem(available, existing.class_id, [&existing](ClassId c) {
                return existing.similar.count(c) != 0;
            });
            existing.hyperparams = hp;
            existing.classifier = fit_binary(prob.X, prob.y, hp);
        } else {
            existing.cannot_be.insert(incoming.class_id);
        }
    }

    ClassEntry entry;
    entry.class_id = incoming.class_id;
    entry.hyperparams = hp;
    if (similar_now.empty()) {
        entry.classifier = BinaryClassifier::dummy();
    } else {
        auto prob = make_problem(available, incoming.class_id, [&similar_now](ClassId c) {
            return similar_now.count(c) != 0;
        });
        entry.classifier = fit_binary(prob.X, prob.y, hp);
    }
    entry.similar = std::move(similar_now);
    model.entries.push_back(std::move(entry));
}

// Inserts one class per the one-vs-previous-similar rule: similarity edges
// point backward only and nothing existing is retrained; non-similar existing
// classes record the newcomer as ruled out.
void ovpsc_insert(ParadigmModel& model, const ClassPtrs& available, const ClassExamples& incoming,
                  const HyperParams& hp) {
    ClassEntry entry;
    entry.class_id = incoming.class_id;
    entry.hyperparams = hp;

    if (model.entries.empty()) {
        entry.classifier = BinaryClassifier::dummy();
        model.entries.push_back(std::move(entry));
        return;
    }

    std::set<ClassId> similar_now;
    for (auto& existing : model.entries) {
        if (is_similar(existing.classifier, incoming.features, hp.lambda_sim)) {
            similar_now.insert(existing.class_id);
        } else {
            existing.cannot_be.insert(incoming.class_id);
        }
    }
    if (similar_now.empty()) {
        // only reachable when lambda_sim = 1 silences even the dummy
        entry.classifier = BinaryClassifier::dummy();
    } else {
        auto prob = make_problem(available, incoming.class_id, [&similar_now](ClassId c) {
            return similar_now.count(c) != 0;
        });
        entry.classifier = fit_binary(prob.X, prob.y, hp);
    }
    entry.similar = std::move(similar_now);
    model.entries.push_back(std::move(entry));
}

void require_paradigm(const ParadigmModel& model, Paradigm expected) {
    if (model.paradigm != expected) {
        throw InvalidArgument("model was built for " + to_string(model.paradigm) +
                              ", not " + to_string(expected));
    }
    if (model.entries.empty()) {
        throw EmptyInput("model holds no classes");
    }
}

// `existing_data` must mirror the model's classes in build order.
void check_existing_data(const ParadigmModel& model, const ClassOrderedData& existing_data) {
    if (existing_data.size() != model.entries.size()) {
        throw LengthMismatch("existing data covers " + std::to_string(existing_data.size()) +
                             " classes, model has " + std::to_string(model.entries.size()));
    }
    for (std::size_t i = 0; i < existing_data.size(); ++i) {
        if (existing_data[i].class_id != model.entries[i].class_id) {
            throw InvalidArgument("existing data order diverges from model build order at "
                                  "position " +
                                  std::to_string(i));
        }
        if (existing_data[i].features.empty()) {
            throw EmptyInput("class " + std::to_string(existing_data[i].class_id) +
                             " has no examples");
        }
    }
}

} // namespace

ClassOrderedData group_by_class(const LabeledDataset& data, std::span<const ClassId> order) {
    ClassOrderedData out;
    std::set<ClassId> taken;
    auto append = [&](ClassId id, const std::vector<std::size_t>& positions) {
        ClassExamples ce;
        ce.class_id = id;
        ce.features.reserve(positions.size());
        for (std::size_t pos : positions) {
            ce.features.push_back(data[pos].features);
        }
        out.push_back(std::move(ce));
    };
    for (ClassId id : order) {
        if (taken.count(id) != 0) {
            continue;
        }
        const auto it = data.class_index().find(id);
        if (it == data.class_index().end()) {
            continue;
        }
        taken.insert(id);
        append(id, it->second);
    }
    for (const auto& [id, positions] : data.class_index()) {
        if (taken.count(id) == 0) {
            append(id, positions);
        }
    }
    return out;
}

bool is_similar(const BinaryClassifier& classifier,
                const std::vector<std::vector<double>>& examples, double lambda_sim) {
    if (examples.empty()) {
        throw EmptyInput("similarity test against zero examples");
    }
    std::size_t count = 0;
    for (const auto& e : examples) {
        if (classifier.classifies_positive(e)) {
            ++count;
        }
    }
    return static_cast<double>(count) > lambda_sim * static_cast<double>(examples.size());
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

ParadigmModel train_ovr(const ClassOrderedData& data, const HyperParams& hp) {
    check_training_data(data, 2);
    hp.validate();

    ParadigmModel model;
    model.paradigm = Paradigm::OvR;
    model.lambda_sim = hp.lambda_sim;
    const ClassPtrs available = as_ptrs(data);
    for (const auto& ce : data) {
        ClassEntry entry;
        entry.class_id = ce.class_id;
        entry.hyperparams = hp;
        auto prob = make_problem(available, ce.class_id, [](ClassId) { return true; });
        entry.classifier = fit_binary(prob.X, prob.y, hp);
        model.entries.push_back(std::move(entry));
    }
    return model;
}

ParadigmModel train_scl(const ClassOrderedData& data, const HyperParams& hp) {
    check_training_data(data, 2);
    hp.validate();

    ParadigmModel model;
    model.paradigm = Paradigm::SCL;
    model.lambda_sim = hp.lambda_sim;
    ClassPtrs available;
    for (const auto& ce : data) {
        available.push_back(&ce);
        scl_insert(model, available, ce, hp);
    }
    return model;
}

ParadigmModel train_ovp(const ClassOrderedData& data, const HyperParams& hp) {
    check_training_data(data, 2);
    hp.validate();

    ParadigmModel model;
    model.paradigm = Paradigm::OvP;
    model.lambda_sim = hp.lambda_sim;
    ClassPtrs available;
    for (const auto& ce : data) {
        available.push_back(&ce);
        ClassEntry entry;
        entry.class_id = ce.class_id;
        entry.hyperparams = hp;
        if (model.entries.empty()) {
            entry.classifier = BinaryClassifier::dummy();
        } else {
            auto prob = make_problem(available, ce.class_id, [](ClassId) { return true; });
            entry.classifier = fit_binary(prob.X, prob.y, hp);
        }
        model.entries.push_back(std::move(entry));
    }
    return model;
}

ParadigmModel train_ovpsc(const ClassOrderedData& data, const HyperParams& hp) {
    check_training_data(data, 2);
    hp.validate();

    ParadigmModel model;
    model.paradigm = Paradigm::OvPSC;
    model.lambda_sim = hp.lambda_sim;
    ClassPtrs available;
    for (const auto& ce : data) {
        available.push_back(&ce);
        ovpsc_insert(model, available, ce, hp);
    }
    return model;
}

ParadigmModel train_paradigm(Paradigm paradigm, const ClassOrderedData& data,
                             const HyperParams& hp) {
    switch (paradigm) {
    case Paradigm::OvR: return train_ovr(data, hp);
    case Paradigm::SCL: return train_scl(data, hp);
    case Paradigm::OvP: return train_ovp(data, hp);
    case Paradigm::OvPSC: return train_ovpsc(data, hp);
    }
    throw InvalidArgument("unhandled paradigm");
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

ClassId predict_ovr(const ParadigmModel& model, std::span<const double> x) {
    require_paradigm(model, Paradigm::OvR);
    ClassId best_id = model.entries.front().class_id;
    double best_conf = -std::numeric_limits<double>::infinity();
    for (const auto& entry : model.entries) {
        const double conf = entry.classifier.confidence(x);
        if (conf > best_conf) {
            best_conf = conf;
            best_id = entry.class_id;
        }
    }
    return best_id;
}

ClassId predict_scl(const ParadigmModel& model, std::span<const double> x) {
    require_paradigm(model, Paradigm::SCL);
    std::set<ClassId> ruled_out;
    bool found = false;
    ClassId top = 0;
    double best_conf = -std::numeric_limits<double>::infinity();
    for (const auto& entry : model.entries) {
        if (ruled_out.count(entry.class_id) != 0) {
            continue;
        }
        const double conf = entry.classifier.confidence(x);
        if (conf > best_conf) {
            best_conf = conf;
            top = entry.class_id;
            found = true;
        }
        if (conf > 0.0) {
            ruled_out.insert(entry.cannot_be.begin(), entry.cannot_be.end());
        }
    }
    if (!found) {
        // every class was ruled out before evaluation; answer with the
        // first-built class and record that the rule fell through
        g_scl_fallbacks.fetch_add(1);
        return model.entries.front().class_id;
    }
    return top;
}

ClassId predict_ovp(const ParadigmModel& model, std::span<const double> x) {
    require_paradigm(model, Paradigm::OvP);
    for (auto it = model.entries.rbegin(); it != model.entries.rend(); ++it) {
        if (it->classifier.confidence(x) > 0.0) {
            return it->class_id;
        }
    }
    return model.entries.front().class_id;
}

ClassId predict_ovpsc(const ParadigmModel& model, std::span<const double> x) {
    require_paradigm(model, Paradigm::OvPSC);
    std::set<ClassId> ruled_out;
    const ClassEntry* answer = nullptr;
    for (const auto& entry : model.entries) {
        if (ruled_out.count(entry.class_id) != 0) {
            continue;
        }
        if (entry.classifier.confidence(x) > 0.0) {
            ruled_out.insert(entry.cannot_be.begin(), entry.cannot_be.end());
            answer = &entry;
        }
    }
    return answer != nullptr ? answer->class_id : model.entries.front().class_id;
}

ClassId predict(const ParadigmModel& model, std::span<const double> x) {
    switch (model.paradigm) {
    case Paradigm::OvR: return predict_ovr(model, x);
    case Paradigm::SCL: return predict_scl(model, x);
    case Paradigm::OvP: return predict_ovp(model, x);
    case Paradigm::OvPSC: return predict_ovpsc(model, x);
    }
    throw InvalidArgument("unhandled paradigm");
}

std::vector<ClassId> predict_all(const ParadigmModel& model, const LabeledDataset& data) {
    std::vector<ClassId> out;
    out.reserve(data.size());
    for (const auto& ex : data.examples()) {
        out.push_back(predict(model, ex.features));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Incremental updates
// ---------------------------------------------------------------------------

ParadigmModel single_class_model(Paradigm paradigm, ClassId class_id, const HyperParams& hp) {
    hp.validate();
    ParadigmModel model;
    model.paradigm = paradigm;
    model.lambda_sim = hp.lambda_sim;
    ClassEntry entry;
    entry.class_id = class_id;
    entry.hyperparams = hp;
    entry.classifier = BinaryClassifier::dummy();
    model.entries.push_back(std::move(entry));
    return model;
}

UpdateResult add_class(const ParadigmModel& model, ClassId class_id,
                       const std::vector<std::vector<double>>& examples,
                       const ClassOrderedData& existing_data, const HyperParams& hp) {
    hp.validate();
    if (model.entries.empty()) {
        throw EmptyInput("cannot extend a model with no classes; start from a one-class model");
    }
    if (model.contains(class_id)) {
        throw DuplicateClass("class " + std::to_string(class_id) + " already exists");
    }
    if (examples.empty()) {
        throw EmptyInput("no examples for the incoming class");
    }
    check_existing_data(model, existing_data);

    ClassExamples incoming;
    incoming.class_id = class_id;
    incoming.features = examples;

    ClassPtrs available = as_ptrs(existing_data);
    available.push_back(&incoming);

    UpdateResult out;
    const auto t0 = std::chrono::steady_clock::now();
    switch (model.paradigm) {
    case Paradigm::OvR: {
        ClassOrderedData all = existing_data;
        all.push_back(incoming);
        out.model = train_ovr(all, hp);
        out.model.label_names = model.label_names;
        break;
    }
    case Paradigm::SCL: {
        out.model = model;
        scl_insert(out.model, available, incoming, hp);
        break;
    }
    case Paradigm::OvP: {
        out.model = model;
        ClassEntry entry;
        entry.class_id = class_id;
        entry.hyperparams = hp;
        auto prob = make_problem(available, class_id, [](ClassId) { return true; });
        entry.classifier = fit_binary(prob.X, prob.y, hp);
        out.model.entries.push_back(std::move(entry));
        break;
    }
    case Paradigm::OvPSC: {
        out.model = model;
        ovpsc_insert(out.model, available, incoming, hp);
        break;
    }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace {

// Refits every non-dummy classifier on rows drawn from `source`, keeping the
// similarity structure and each entry's stored hyperparameters. Entries whose
// class (or whole negative side) is absent from `source` are left untouched.
void fine_tune(ParadigmModel& model, const ClassOrderedData& source) {
    const ClassPtrs available = as_ptrs(source);
    std::set<ClassId> present;
    for (const auto& ce : source) {
        present.insert(ce.class_id);
    }

    for (std::size_t i = 0; i < model.entries.size(); ++i) {
        ClassEntry& entry = model.entries[i];
        if (entry.classifier.is_dummy()) {
            continue;
        }
        if (present.count(entry.class_id) == 0) {
            continue;
        }

        // negative side per paradigm: everything else, the similar set, or
        // the build-order predecessors
        std::set<ClassId> negatives;
        switch (model.paradigm) {
        case Paradigm::OvR:
            for (const auto& other : model.entries) {
                if (other.class_id != entry.class_id) {
                    negatives.insert(other.class_id);
                }
            }
            break;
        case Paradigm::SCL:
        case Paradigm::OvPSC:
            negatives = entry.similar;
            break;
        case Paradigm::OvP:
            for (std::size_t j = 0; j < i; ++j) {
                negatives.insert(model.entries[j].class_id);
            }
            break;
        }

        bool has_negative_rows = false;
        for (ClassId id : negatives) {
            if (present.count(id) != 0) {
                has_negative_rows = true;
                break;
            }
        }
        if (!has_negative_rows) {
            continue;
        }

        auto prob = make_problem(available, entry.class_id, [&negatives](ClassId c) {
            return negatives.count(c) != 0;
        });
        entry.classifier =
            fit_binary(prob.X, prob.y, entry.hyperparams, &entry.classifier);
    }
}

} // namespace

UpdateResult update_with_data(const ParadigmModel& model, const ClassOrderedData& new_data,
                              const ClassOrderedData& accumulated_data, UpdateStrategy strategy,
                              const HyperParams& hp) {
    hp.validate();
    if (model.entries.empty()) {
        throw EmptyInput("cannot update a model with no classes");
    }
    if (new_data.empty()) {
        throw EmptyInput("no new data given");
    }
    std::set<ClassId> seen;
    for (const auto& ce : new_data) {
        if (!seen.insert(ce.class_id).second) {
            throw DuplicateClass("class " + std::to_string(ce.class_id) +
                                 " listed twice in the new data");
        }
        if (!model.contains(ce.class_id)) {
            throw UnknownClass("new data contains unknown class " +
                               std::to_string(ce.class_id));
        }
        if (ce.features.empty()) {
            throw EmptyInput("class " + std::to_string(ce.class_id) +
                             " has no examples in the new data");
        }
    }

    UpdateResult out;
    const auto t0 = std::chrono::steady_clock::now();
    switch (strategy) {
    case UpdateStrategy::RetrainScratch:
        check_existing_data(model, accumulated_data);
        out.model = train_paradigm(model.paradigm, accumulated_data, hp);
        out.model.label_names = model.label_names;
        break;
    case UpdateStrategy::FineTuneNewOnly:
        out.model = model;
        fine_tune(out.model, new_data);
        break;
    case UpdateStrategy::FineTuneAll:
        check_existing_data(model, accumulated_data);
        out.model = model;
        fine_tune(out.model, accumulated_data);
        break;
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace diag {

std::uint64_t scl_prediction_fallbacks() { return g_scl_fallbacks.load(); }
void reset_scl_prediction_fallbacks() { g_scl_fallbacks.store(0); }

} // namespace diag

} // namespace ovkit
