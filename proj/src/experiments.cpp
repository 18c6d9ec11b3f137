#include "ovkit/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace ovkit {

namespace {

// Deterministic seed derivation for the sub-steps of a run.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

const std::vector<Paradigm> kParadigmOrder = {Paradigm::OvR, Paradigm::SCL, Paradigm::OvP,
                                              Paradigm::OvPSC};
const std::vector<BaseKind> kBaseOrder = {BaseKind::LogisticRegression, BaseKind::SvmRbf};

// Requested subsets in the fixed table order, duplicates dropped.
template <typename T>
std::vector<T> canonical_subset(const std::vector<T>& requested, const std::vector<T>& order) {
    std::vector<T> out;
    for (T item : order) {
        if (std::find(requested.begin(), requested.end(), item) != requested.end()) {
            out.push_back(item);
        }
    }
    return out;
}

struct CellAggregate {
    std::string label;
    MetricsRow sum;
    std::vector<MetricsRow> per_fold;
};

// Keyed by (paradigm position, base position, iteration position) so map
// order is exactly the emission order.
using CellKey = std::tuple<std::size_t, std::size_t, std::size_t>;

class ReportBuilder {
public:
    ReportBuilder(const ExperimentConfig& cfg, std::string dataset_name, ExperimentKind kind)
        : cfg_(cfg), folds_(cfg.folds) {
        report_.dataset = std::move(dataset_name);
        report_.experiment = kind;
        report_.seed = cfg.seed;
        report_.seed_source = cfg.seed_source;
    }

    void record(std::size_t p, std::size_t b, std::size_t iter, const std::string& label,
                const MetricsRow& metrics) {
        CellAggregate& cell = cells_[{p, b, iter}];
        cell.label = label;
        cell.sum.accuracy += metrics.accuracy;
        cell.sum.macro_f1 += metrics.macro_f1;
        cell.sum.train_seconds += metrics.train_seconds;
        cell.per_fold.push_back(metrics);
    }

    ExperimentReport finish(const std::vector<Paradigm>& paradigms,
                            const std::vector<BaseKind>& bases) {
        const double n = static_cast<double>(folds_);
        for (const auto& [key, cell] : cells_) {
            ReportRow row;
            row.dataset = report_.dataset;
            row.paradigm = paradigms[std::get<0>(key)];
            row.base_kind = bases[std::get<1>(key)];
            row.iteration = cell.label;
            row.fold = -1;
            row.metrics.accuracy = cell.sum.accuracy / n;
            row.metrics.macro_f1 = cell.sum.macro_f1 / n;
            row.metrics.train_seconds = cell.sum.train_seconds / n;
            report_.rows.push_back(row);
            if (cfg_.per_fold_detail) {
                for (std::size_t f = 0; f < cell.per_fold.size(); ++f) {
                    ReportRow detail = row;
                    detail.fold = static_cast<int>(f);
                    detail.metrics = cell.per_fold[f];
                    report_.rows.push_back(detail);
                }
            }
        }
        return std::move(report_);
    }

private:
    const ExperimentConfig& cfg_;
    std::size_t folds_;
    std::map<CellKey, CellAggregate> cells_;
    ExperimentReport report_;
};

MetricsRow score_model(const ParadigmModel& model, const LabeledDataset& test, double seconds) {
    std::vector<ClassId> truths;
    truths.reserve(test.size());
    for (const auto& ex : test.examples()) {
        truths.push_back(ex.label);
    }
    const std::vector<ClassId> preds = predict_all(model, test);
    MetricsRow row;
    row.accuracy = accuracy(preds, truths);
    row.macro_f1 = macro_f1(preds, truths);
    row.train_seconds = seconds;
    return row;
}

} // namespace

DatasetSpec cluster_variant(const std::string& name) {
    DatasetSpec spec;
    spec.kind = DatasetSpec::Kind::GeneratedClusters;
    spec.name = name;
    if (name == "clusters_veryFar") {
        spec.cluster.radius = 0.1;
    } else if (name == "clusters_far") {
        spec.cluster.radius = 0.4;
    } else if (name == "clusters_close") {
        spec.cluster.radius = 0.5;
    } else if (name == "clusters_intersecting") {
        spec.cluster.radius = 0.525;
    } else {
        throw InvalidArgument("unknown cluster variant '" + name + "'");
    }
    return spec;
}

DatasetSpec csv_dataset(const std::string& path, const std::string& label_column) {
    DatasetSpec spec;
    spec.kind = DatasetSpec::Kind::CsvFile;
    spec.name = path;
    spec.csv_path = path;
    spec.label_column = label_column;
    return spec;
}

ExperimentKind parse_experiment(const std::string& text) {
    if (text == "1a") return ExperimentKind::Exp1a;
    if (text == "1b") return ExperimentKind::Exp1b;
    if (text == "1c") return ExperimentKind::Exp1c;
    if (text == "2") return ExperimentKind::Exp2;
    throw InvalidArgument("unknown experiment '" + text + "' (expected 1a, 1b, 1c or 2)");
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::Exp1a: return "1a";
    case ExperimentKind::Exp1b: return "1b";
    case ExperimentKind::Exp1c: return "1c";
    case ExperimentKind::Exp2: return "2";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (paradigms.empty()) {
        throw InvalidArgument("no paradigms requested");
    }
    if (base_kinds.empty()) {
        throw InvalidArgument("no base classifiers requested");
    }
    if (folds < 2) {
        throw InvalidArgument("need at least 2 folds");
    }
    if (tuning_folds < 2) {
        throw InvalidArgument("need at least 2 tuning folds");
    }
    if (c_grid.empty()) {
        throw EmptyInput("empty regularization grid");
    }
    for (double c : c_grid) {
        if (!(c > 0.0)) {
            throw InvalidArgument("grid values must be positive");
        }
    }
    if (!(lambda_sim >= 0.0 && lambda_sim <= 1.0)) {
        throw InvalidArgument("similarity threshold must lie in [0, 1]");
    }
    if (dataset.kind == DatasetSpec::Kind::CsvFile && dataset.csv_path.empty()) {
        throw InvalidArgument("csv dataset without a path");
    }
}

LabeledDataset load_dataset(const DatasetSpec& spec) {
    if (spec.kind == DatasetSpec::Kind::GeneratedClusters) {
        return generate_clusters(spec.cluster);
    }
    return load_csv(spec.csv_path, spec.label_column);
}

ExperimentReport run_experiment_1(const ExperimentConfig& cfg, char variant) {
    cfg.validate();
    UpdateStrategy strategy;
    ExperimentKind kind;
    switch (variant) {
    case 'a':
        strategy = UpdateStrategy::RetrainScratch;
        kind = ExperimentKind::Exp1a;
        break;
    case 'b':
        strategy = UpdateStrategy::FineTuneNewOnly;
        kind = ExperimentKind::Exp1b;
        break;
    case 'c':
        strategy = UpdateStrategy::FineTuneAll;
        kind = ExperimentKind::Exp1c;
        break;
    default:
        throw InvalidArgument("experiment variant must be a, b or c");
    }

    DatasetSpec source = cfg.dataset;
    if (source.kind == DatasetSpec::Kind::GeneratedClusters) {
        source.cluster.seed = cfg.seed;
    }
    const LabeledDataset full = load_dataset(source);
    const std::vector<FoldSplit> folds = stratified_folds(full, cfg.folds, cfg.seed);

    const std::vector<Paradigm> paradigms = canonical_subset(cfg.paradigms, kParadigmOrder);
    const std::vector<BaseKind> bases = canonical_subset(cfg.base_kinds, kBaseOrder);
    ReportBuilder builder(cfg, source.name, kind);

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const LabeledDataset train_raw = full.subset(folds[f].train);
        const LabeledDataset test_raw = full.subset(folds[f].test);
        const Normalizer norm = fit_normalizer(train_raw, source.onehot_columns);
        const LabeledDataset train = apply_normalizer(norm, train_raw);
        const LabeledDataset test = apply_normalizer(norm, test_raw);

        const std::array<LabeledDataset, 3> stages =
            split_msets(train, {0.5, 0.3, 0.2}, mix_seed(cfg.seed, 1000 + f));
        const std::vector<ClassId> order = order_classes_by_frequency(train);

        for (std::size_t p = 0; p < paradigms.size(); ++p) {
            for (std::size_t b = 0; b < bases.size(); ++b) {
                const HyperParams hp =
                    grid_search_c(stages[0], paradigms[p], bases[b], cfg.c_grid,
                                  cfg.tuning_folds, mix_seed(cfg.seed, 2000 + f),
                                  cfg.lambda_sim, order);

                const ClassOrderedData first = group_by_class(stages[0], order);
                auto [model, seconds] =
                    timed([&] { return train_paradigm(paradigms[p], first, hp); });
                MetricsRow previous = score_model(model, test, seconds);
                builder.record(p, b, 0, "M=0", previous);

                LabeledDataset seen = stages[0];
                previous.train_seconds = 0.0;
                for (std::size_t m = 1; m < 3; ++m) {
                    if (stages[m].empty()) {
                        // nothing arrived: the model is untouched
                        previous.train_seconds = 0.0;
                        builder.record(p, b, m, "M=" + std::to_string(m), previous);
                        continue;
                    }
                    for (const auto& ex : stages[m].examples()) {
                        seen.add(ex);
                    }
                    const ClassOrderedData fresh = group_by_class(stages[m], order);
                    const ClassOrderedData accumulated = group_by_class(seen, order);
                    UpdateResult upd =
                        update_with_data(model, fresh, accumulated, strategy, hp);
                    model = std::move(upd.model);
                    const MetricsRow row = score_model(model, test, upd.seconds);
                    builder.record(p, b, m, "M=" + std::to_string(m), row);
                    previous = row;
                    previous.train_seconds = 0.0;
                }
            }
        }
    }
    return builder.finish(paradigms, bases);
}

ExperimentReport run_experiment_2(const ExperimentConfig& cfg) {
    cfg.validate();

    DatasetSpec source = cfg.dataset;
    if (source.kind == DatasetSpec::Kind::GeneratedClusters) {
        source.cluster.seed = cfg.seed;
    }
    const LabeledDataset full = load_dataset(source);
    if (full.class_count() < 2) {
        throw SingleClassInput("class-arrival experiment needs at least two classes");
    }
    const std::vector<FoldSplit> folds = stratified_folds(full, cfg.folds, cfg.seed);

    const std::vector<Paradigm> paradigms = canonical_subset(cfg.paradigms, kParadigmOrder);
    const std::vector<BaseKind> bases = canonical_subset(cfg.base_kinds, kBaseOrder);
    ReportBuilder builder(cfg, source.name, ExperimentKind::Exp2);

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const LabeledDataset train_raw = full.subset(folds[f].train);
        const LabeledDataset test_raw = full.subset(folds[f].test);
        const Normalizer norm = fit_normalizer(train_raw, source.onehot_columns);
        const LabeledDataset train = apply_normalizer(norm, train_raw);
        const LabeledDataset test = apply_normalizer(norm, test_raw);

        const std::vector<ClassId> order = order_classes_by_frequency(train);
        const ClassOrderedData grouped = group_by_class(train, order);

        for (std::size_t p = 0; p < paradigms.size(); ++p) {
            for (std::size_t b = 0; b < bases.size(); ++b) {
                HyperParams boot;
                boot.base_kind = bases[b];
                boot.lambda_sim = cfg.lambda_sim;
                ParadigmModel model = single_class_model(paradigms[p], order[0], boot);

                ClassOrderedData existing;
                existing.push_back(grouped[0]);
                std::set<ClassId> seen_ids = {order[0]};
                LabeledDataset seen = train.filter_classes(seen_ids);

                for (std::size_t k = 1; k < order.size(); ++k) {
                    const ClassId incoming = order[k];
                    seen_ids.insert(incoming);
                    seen = train.filter_classes(seen_ids);

                    const std::span<const ClassId> prefix(order.data(), k + 1);
                    const HyperParams hp =
                        grid_search_c(seen, paradigms[p], bases[b], cfg.c_grid,
                                      cfg.tuning_folds, mix_seed(cfg.seed, 3000 + f * 64 + k),
                                      cfg.lambda_sim, prefix);

                    UpdateResult upd =
                        add_class(model, incoming, grouped[k].features, existing, hp);
                    model = std::move(upd.model);
                    existing.push_back(grouped[k]);

                    const LabeledDataset test_seen = test.filter_classes(seen_ids);
                    const std::string label =
                        "N" + std::to_string(k + 1) + "=" + train.name_of(incoming);
                    builder.record(p, b, k, label,
                                   score_model(model, test_seen, upd.seconds));
                }
            }
        }
    }
    return builder.finish(paradigms, bases);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
    case ExperimentKind::Exp1a: return run_experiment_1(cfg, 'a');
    case ExperimentKind::Exp1b: return run_experiment_1(cfg, 'b');
    case ExperimentKind::Exp1c: return run_experiment_1(cfg, 'c');
    case ExperimentKind::Exp2: return run_experiment_2(cfg);
    }
    throw InvalidArgument("unhandled experiment kind");
}

std::string emit_report(const ExperimentReport& report, ReportFormat format) {
    if (report.rows.empty()) {
        throw EmptyInput("refusing to render an empty report");
    }

    char buf[64];
    auto fixed3 = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };

    std::ostringstream out;
    out << "# experiment=" << to_string(report.experiment) << " dataset=" << report.dataset
        << " seed=" << report.seed << " seed_source=" << report.seed_source << '\n';

    const char* columns[] = {"dataset",  "paradigm", "base",          "iteration",
                             "fold",     "accuracy", "macro_f1",      "train_seconds"};
    if (format == ReportFormat::Csv) {
        for (std::size_t i = 0; i < std::size(columns); ++i) {
            out << (i == 0 ? "" : ",") << columns[i];
        }
        out << '\n';
        for (const ReportRow& row : report.rows) {
            out << row.dataset << ',' << to_string(row.paradigm) << ','
                << to_string(row.base_kind) << ',' << row.iteration << ','
                << (row.fold < 0 ? std::string("mean") : std::to_string(row.fold)) << ','
                << fixed3(row.metrics.accuracy) << ',' << fixed3(row.metrics.macro_f1) << ','
                << fixed3(row.metrics.train_seconds) << '\n';
        }
    } else {
        out << '|';
        for (const char* c : columns) {
            out << ' ' << c << " |";
        }
        out << "\n|";
        for (std::size_t i = 0; i < std::size(columns); ++i) {
            out << " --- |";
        }
        out << '\n';
        for (const ReportRow& row : report.rows) {
            out << "| " << row.dataset << " | " << to_string(row.paradigm) << " | "
                << to_string(row.base_kind) << " | " << row.iteration << " | "
                << (row.fold < 0 ? std::string("mean") : std::to_string(row.fold)) << " | "
                << fixed3(row.metrics.accuracy) << " | " << fixed3(row.metrics.macro_f1)
                << " | " << fixed3(row.metrics.train_seconds) << " |\n";
        }
    }
    return out.str();
}

} // namespace ovkit
