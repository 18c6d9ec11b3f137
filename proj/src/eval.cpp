#include "ovkit/eval.hpp"

#include <algorithm>
#include <map>

namespace ovkit {

double accuracy(std::span<const ClassId> predictions, std::span<const ClassId> truths) {
    if (predictions.size() != truths.size()) {
        throw LengthMismatch("prediction and truth vectors differ in length");
    }
    if (truths.empty()) {
        throw EmptyInput("cannot score zero predictions");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (predictions[i] == truths[i]) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(truths.size());
}

double macro_f1(std::span<const ClassId> predictions, std::span<const ClassId> truths) {
    if (predictions.size() != truths.size()) {
        throw LengthMismatch("prediction and truth vectors differ in length");
    }
    if (truths.empty()) {
        throw EmptyInput("cannot score zero predictions");
    }

    struct Counts {
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t fn = 0;
    };
    std::map<ClassId, Counts> per_class;
    for (ClassId t : truths) {
        per_class[t]; // ensure every truth class participates in the mean
    }
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (predictions[i] == truths[i]) {
            per_class[truths[i]].tp += 1;
        } else {
            per_class[truths[i]].fn += 1;
            const auto it = per_class.find(predictions[i]);
            if (it != per_class.end()) {
                it->second.fp += 1;
            }
            // predictions outside the truth classes carry no weight of their own
        }
    }

    double sum = 0.0;
    for (const auto& [id, c] : per_class) {
        const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
        sum += denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
    }
    return sum / static_cast<double>(per_class.size());
}

double default_gamma(const LabeledDataset& data) {
    if (data.empty()) {
        throw EmptyInput("cannot derive a kernel width from an empty dataset");
    }
    const std::size_t d = data.dimension();
    const double n = static_cast<double>(data.size());

    std::vector<double> mean(d, 0.0);
    for (const auto& ex : data.examples()) {
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += ex.features[j];
        }
    }
    for (double& m : mean) {
        m /= n;
    }
    double total_var = 0.0;
    for (const auto& ex : data.examples()) {
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = ex.features[j] - mean[j];
            total_var += diff * diff;
        }
    }
    const double mean_var = total_var / (n * static_cast<double>(d));
    const double denom = static_cast<double>(d) * std::max(mean_var, 1e-12);
    return 1.0 / denom;
}

HyperParams grid_search_c(const LabeledDataset& train, Paradigm paradigm, BaseKind base_kind,
                          std::span<const double> grid, std::size_t folds, std::uint64_t seed,
                          double lambda_sim, std::span<const ClassId> order) {
    if (grid.empty()) {
        throw EmptyInput("empty regularization grid");
    }
    for (double c : grid) {
        if (!(c > 0.0) || !std::isfinite(c)) {
            throw InvalidArgument("grid values must be positive and finite");
        }
    }
    if (train.class_count() < 2) {
        throw SingleClassInput("hyperparameter search needs at least two classes");
    }

    // ties resolve to the smaller constant regardless of the caller's order
    std::vector<double> candidates(grid.begin(), grid.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<ClassId> default_order;
    if (order.empty()) {
        default_order = order_classes_by_frequency(train);
        order = default_order;
    }

    const std::vector<FoldSplit> splits = stratified_folds(train, folds, seed);

    HyperParams hp;
    hp.base_kind = base_kind;
    hp.gamma = default_gamma(train);
    hp.lambda_sim = lambda_sim;

    double best_score = -1.0;
    double best_c = candidates.front();
    for (double c : candidates) {
        hp.c_reg = c;
        double score_sum = 0.0;
        for (const FoldSplit& split : splits) {
            const LabeledDataset cv_train = train.subset(split.train);
            const LabeledDataset cv_test = train.subset(split.test);
            const ParadigmModel model = train_paradigm(paradigm, group_by_class(cv_train, order), hp);
            std::vector<ClassId> truths;
            truths.reserve(cv_test.size());
            for (const auto& ex : cv_test.examples()) {
                truths.push_back(ex.label);
            }
            score_sum += accuracy(predict_all(model, cv_test), truths);
        }
        const double score = score_sum / static_cast<double>(splits.size());
        if (score > best_score) {
            best_score = score;
            best_c = c;
        }
    }

    hp.c_reg = best_c;
    return hp;
}

} // namespace ovkit
