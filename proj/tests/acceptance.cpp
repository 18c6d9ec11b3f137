// Acceptance gate for the library and CLI. Each numbered check prints one
// PASS/FAIL line with its key measurements; the exit status is the number of
// failed checks. The CLI binary path is expected as argv[1] (used by the
// determinism check); every other check exercises the library directly.

#include "ovkit/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ovkit;

namespace {

int failures = 0;

void report_line(int id, bool pass, const std::string& title, const std::string& detail) {
    std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

// Runs one check, turning any escaped exception into an honest FAIL line.
void check(int id, const std::string& title,
           const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [pass, detail] = body();
        report_line(id, pass, title, detail);
    } catch (const std::exception& e) {
        report_line(id, false, title, std::string("exception: ") + e.what());
    }
}

std::string fmt(double v, int digits = 3) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

const std::vector<Paradigm> kAllParadigms{Paradigm::OvR, Paradigm::SCL, Paradigm::OvP,
                                          Paradigm::OvPSC};

ExperimentConfig benchmark_config(const std::string& variant, ExperimentKind kind,
                                  std::vector<BaseKind> bases) {
    ExperimentConfig cfg;
    cfg.dataset = cluster_variant(variant);
    cfg.experiment = kind;
    cfg.base_kinds = std::move(bases);
    return cfg; // defaults: all paradigms, 100 points/cluster, 5 folds, seed 42
}

const ReportRow* mean_row(const ExperimentReport& report, Paradigm p, BaseKind b,
                          const std::string& iteration) {
    for (const auto& row : report.rows) {
        if (row.fold == -1 && row.paradigm == p && row.base_kind == b &&
            row.iteration == iteration) {
            return &row;
        }
    }
    return nullptr;
}

double acc_at(const ExperimentReport& report, Paradigm p, BaseKind b,
              const std::string& iteration) {
    const ReportRow* row = mean_row(report, p, b, iteration);
    if (row == nullptr) {
        throw InvalidArgument("report row missing for " + to_string(p) + "/" + to_string(b) +
                              "/" + iteration);
    }
    return row->metrics.accuracy;
}

double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::vector<double>> gauss_blob(double cx, double cy, double sigma, std::size_t n,
                                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u1 = std::max(unit(rng), 1e-300);
        const double u2 = unit(rng);
        const double m = std::sqrt(-2.0 * std::log(u1));
        out.push_back({cx + sigma * m * std::cos(2.0 * M_PI * u2),
                       cy + sigma * m * std::sin(2.0 * M_PI * u2)});
    }
    return out;
}

// Three compact classes on a triangle plus one wide class blanketing all of
// them; every class pair comes out mutually similar at threshold 0.02.
ClassOrderedData overlapping_four(std::size_t per_class, std::uint64_t seed) {
    return {
        {0, gauss_blob(0.0, 0.0, 0.3, per_class, seed + 0)},
        {1, gauss_blob(1.0, 0.0, 0.3, per_class, seed + 1)},
        {2, gauss_blob(0.5, 0.866, 0.3, per_class, seed + 2)},
        {3, gauss_blob(0.5, 0.289, 1.0, per_class, seed + 3)},
    };
}

// Largest violation of the support-vector optimality conditions: every
// training point must satisfy the margin rule matching its recovered dual
// coefficient (zero, free, or at the box bound).
double svm_kkt_violation(const BinaryClassifier& clf, const Matrix& X, std::span<const int> y,
                         double c) {
    const auto& svm = std::get<SvmRbfClassifier>(clf.model());
    double worst = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double alpha = 0.0;
        for (std::size_t k = 0; k < svm.support_vectors.rows; ++k) {
            bool same = true;
            for (std::size_t j = 0; j < X.cols; ++j) {
                if (svm.support_vectors.at(k, j) != X.at(i, j)) {
                    same = false;
                    break;
                }
            }
            if (same) {
                alpha = svm.dual_coeffs[k] * static_cast<double>(y[i]);
                break;
            }
        }
        const double margin = static_cast<double>(y[i]) * clf.confidence(X.row(i));
        if (alpha <= 1e-9 * c) {
            worst = std::max(worst, 1.0 - margin);
        } else if (alpha >= c * (1.0 - 1e-9)) {
            worst = std::max(worst, margin - 1.0);
        } else {
            worst = std::max(worst, std::abs(margin - 1.0));
        }
    }
    return worst;
}

// accuracy,macro_f1 string pairs of the data rows in a rendered CSV report
std::vector<std::string> quality_fields_of_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot read report '" + path + "'");
    }
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("dataset,", 0) == 0) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            fields.push_back(cell);
        }
        if (fields.size() != 8) {
            throw ParseError("unexpected report row: " + line);
        }
        out.push_back(fields[5] + "," + fields[6]);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";

    // Benchmark runs shared across several checks (defaults: seed 42, 100
    // points per cluster, 5 folds, full regularization grid, all paradigms).
    std::optional<ExperimentReport> very_far_svm;  // 1a
    std::optional<ExperimentReport> far_svm;       // 1a
    std::optional<ExperimentReport> far_lr;        // 1a
    std::optional<ExperimentReport> close_svm_a;   // 1a
    std::optional<ExperimentReport> close_svm_b;   // 1b
    std::optional<ExperimentReport> intersecting;  // 1a, both bases

    check(1, "distant clusters saturate every paradigm (SVM, staged runs)", [&] {
        auto [rep, secs] = timed([&] {
            return run_experiment(
                benchmark_config("clusters_veryFar", ExperimentKind::Exp1a, {BaseKind::SvmRbf}));
        });
        very_far_svm = std::move(rep);
        double min_acc = 1.0;
        for (Paradigm p : kAllParadigms) {
            for (const char* m : {"M=0", "M=1", "M=2"}) {
                min_acc = std::min(min_acc, acc_at(*very_far_svm, p, BaseKind::SvmRbf, m));
            }
        }
        const bool pass = min_acc >= 1.0 - 0.005 && secs < 30.0;
        return std::make_pair(pass, "min accuracy " + fmt(min_acc) + " (floor 0.995), " +
                                        fmt(secs, 1) + "s (budget 30s)");
    });

    check(2, "well-separated clusters: SVM final accuracy floors", [&] {
        auto [rep, secs] = timed([&] {
            return run_experiment(
                benchmark_config("clusters_far", ExperimentKind::Exp1a, {BaseKind::SvmRbf}));
        });
        far_svm = std::move(rep);
        const double ovr = acc_at(*far_svm, Paradigm::OvR, BaseKind::SvmRbf, "M=2");
        const double scl = acc_at(*far_svm, Paradigm::SCL, BaseKind::SvmRbf, "M=2");
        const double ovp = acc_at(*far_svm, Paradigm::OvP, BaseKind::SvmRbf, "M=2");
        const double ovpsc = acc_at(*far_svm, Paradigm::OvPSC, BaseKind::SvmRbf, "M=2");
        const bool pass =
            ovr >= 0.95 && scl >= 0.98 && ovp >= 0.98 && ovpsc >= 0.98 && secs < 60.0;
        return std::make_pair(pass, "OvR " + fmt(ovr) + " (floor 0.95); SCL " + fmt(scl) +
                                        ", OvP " + fmt(ovp) + ", OvPSC " + fmt(ovpsc) +
                                        " (floor 0.98); " + fmt(secs, 1) + "s (budget 60s)");
    });

    check(3, "well-separated clusters: logistic-regression paradigm ordering", [&] {
        far_lr = run_experiment(benchmark_config("clusters_far", ExperimentKind::Exp1a,
                                                 {BaseKind::LogisticRegression}));
        const double ovr = acc_at(*far_lr, Paradigm::OvR, BaseKind::LogisticRegression, "M=2");
        const double scl = acc_at(*far_lr, Paradigm::SCL, BaseKind::LogisticRegression, "M=2");
        const double ovp = acc_at(*far_lr, Paradigm::OvP, BaseKind::LogisticRegression, "M=2");
        const double ovpsc =
            acc_at(*far_lr, Paradigm::OvPSC, BaseKind::LogisticRegression, "M=2");

        const bool order_ok =
            ovr > ovp && ovr > ovpsc && ovp - scl >= 0.10 && ovpsc - scl >= 0.10;
        // reference accuracies for this generator configuration, tolerance 0.07
        const bool near_ok = std::abs(ovr - 0.984) <= 0.07 && std::abs(scl - 0.702) <= 0.07 &&
                             std::abs(ovp - 0.928) <= 0.07 && std::abs(ovpsc - 0.930) <= 0.07;
        return std::make_pair(order_ok && near_ok,
                              "OvR " + fmt(ovr) + " > {OvP " + fmt(ovp) + ", OvPSC " +
                                  fmt(ovpsc) + "} > SCL " + fmt(scl) +
                                  " by >=0.10; references 0.984/0.702/0.928/0.930 +-0.07");
    });

    check(4, "ninth-class arrival: scan-style update beats the full rebuild 2x", [&] {
        DatasetSpec spec = cluster_variant("clusters_far");
        spec.cluster.seed = 42;
        const LabeledDataset raw = load_dataset(spec);
        const Normalizer norm = fit_normalizer(raw);
        const LabeledDataset data = apply_normalizer(norm, raw);
        const std::vector<ClassId> order = order_classes_by_frequency(data);
        const ClassOrderedData grouped = group_by_class(data, order);
        const ClassOrderedData first8(grouped.begin(), grouped.begin() + 8);
        const ClassExamples& ninth = grouped[8];

        bool pass = true;
        std::string detail;
        for (BaseKind base : {BaseKind::LogisticRegression, BaseKind::SvmRbf}) {
            HyperParams hp;
            hp.base_kind = base;
            hp.c_reg = 1.0;
            hp.gamma = default_gamma(data);
            const ParadigmModel ovp = train_ovp(first8, hp);
            const ParadigmModel ovr = train_ovr(first8, hp);

            std::vector<double> t_update, t_rebuild;
            for (int rep = 0; rep < 5; ++rep) {
                t_update.push_back(
                    add_class(ovp, ninth.class_id, ninth.features, first8, hp).seconds);
                t_rebuild.push_back(
                    add_class(ovr, ninth.class_id, ninth.features, first8, hp).seconds);
            }
            std::sort(t_update.begin(), t_update.end());
            std::sort(t_rebuild.begin(), t_rebuild.end());
            const double med_update = t_update[2];
            const double med_rebuild = t_rebuild[2];
            pass = pass && med_update < 0.5 * med_rebuild;
            detail += to_string(base) + " OvP " + fmt(med_update, 4) + "s vs OvR " +
                      fmt(med_rebuild, 4) + "s; ";
        }
        return std::make_pair(pass, detail + "medians of 5, threshold 0.5x");
    });

    check(5, "mutually-overlapping classes: pruned paradigms match their baselines", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const ClassOrderedData train = overlapping_four(100, 500);
        const ClassOrderedData fresh = overlapping_four(125, 424242); // 500 points

        bool all_similar = true;
        std::size_t scl_mismatch = 0;
        std::size_t ovpsc_mismatch = 0;
        std::size_t points = 0;
        for (BaseKind base : {BaseKind::LogisticRegression, BaseKind::SvmRbf}) {
            HyperParams hp;
            hp.base_kind = base;
            hp.c_reg = 1.0;
            hp.gamma = 0.5;
            hp.lambda_sim = 0.02;

            const ParadigmModel scl = train_scl(train, hp);
            for (const ClassEntry& entry : scl.entries) {
                all_similar = all_similar && entry.similar.size() == train.size() - 1;
            }
            const ParadigmModel ovr = train_ovr(train, hp);
            const ParadigmModel ovp = train_ovp(train, hp);
            const ParadigmModel ovpsc = train_ovpsc(train, hp);

            for (const ClassExamples& cls : fresh) {
                for (const auto& x : cls.features) {
                    scl_mismatch += predict(scl, x) != predict(ovr, x) ? 1 : 0;
                    ovpsc_mismatch += predict(ovpsc, x) != predict(ovp, x) ? 1 : 0;
                    ++points;
                }
            }
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass =
            all_similar && scl_mismatch == 0 && ovpsc_mismatch == 0 && secs < 10.0;
        return std::make_pair(
            pass, std::string(all_similar ? "all class pairs similar" : "similarity incomplete") +
                      "; disagreements vs baselines " + std::to_string(scl_mismatch) + " and " +
                      std::to_string(ovpsc_mismatch) + " on " + std::to_string(points / 2) +
                      " points x 2 bases; " + fmt(secs, 1) + "s (budget 10s)");
    });

    check(6, "macro-F1 tracks accuracy on balanced cluster data", [&] {
        close_svm_a = run_experiment(
            benchmark_config("clusters_close", ExperimentKind::Exp1a, {BaseKind::SvmRbf}));
        close_svm_b = run_experiment(
            benchmark_config("clusters_close", ExperimentKind::Exp1b, {BaseKind::SvmRbf}));
        intersecting = run_experiment(
            benchmark_config("clusters_intersecting", ExperimentKind::Exp1a,
                             {BaseKind::LogisticRegression, BaseKind::SvmRbf}));

        if (!very_far_svm || !far_svm || !far_lr) {
            return std::make_pair(false,
                                  std::string("earlier benchmark runs unavailable"));
        }
        std::size_t rows_checked = 0;
        double worst_gap = 0.0;
        for (const auto* rep : {&*very_far_svm, &*far_svm, &*far_lr, &*close_svm_a,
                                &*close_svm_b, &*intersecting}) {
            for (const ReportRow& row : rep->rows) {
                if (row.fold != -1 || row.metrics.accuracy < 0.9) {
                    continue;
                }
                ++rows_checked;
                worst_gap =
                    std::max(worst_gap, std::abs(row.metrics.macro_f1 - row.metrics.accuracy));
            }
        }
        const bool pass = rows_checked > 0 && worst_gap <= 0.02;
        return std::make_pair(pass, "max |macro_f1 - accuracy| " + fmt(worst_gap, 4) + " over " +
                                        std::to_string(rows_checked) +
                                        " rows with accuracy >= 0.9 (cap 0.02)");
    });

    check(7, "solver numerics: gradient check and optimality conditions", [&] {
        const auto t0 = std::chrono::steady_clock::now();

        std::mt19937_64 rng(20240817);
        double worst_rel = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            Matrix X;
            std::vector<int> y;
            for (std::size_t i = 0; i < 30; ++i) {
                std::vector<double> row(5);
                for (auto& v : row) {
                    v = 4.0 * unit(rng) - 2.0;
                }
                X.push_row(row);
                y.push_back(i % 2 == 0 ? 1 : -1);
            }
            const double c = 0.1 + 9.9 * unit(rng);
            std::vector<double> w(5);
            for (auto& v : w) {
                v = 2.0 * unit(rng) - 1.0;
            }
            const double b = 2.0 * unit(rng) - 1.0;

            std::vector<double> grad_w;
            double grad_b = 0.0;
            (void)logistic_objective(X, y, c, w, b, &grad_w, &grad_b);
            const double h = 1e-6;
            for (std::size_t j = 0; j <= w.size(); ++j) {
                auto probe = [&](double delta) {
                    std::vector<double> wp = w;
                    double bp = b;
                    if (j < w.size()) {
                        wp[j] += delta;
                    } else {
                        bp += delta;
                    }
                    return logistic_objective(X, y, c, wp, bp);
                };
                const double numeric = (probe(h) - probe(-h)) / (2.0 * h);
                const double analytic = j < w.size() ? grad_w[j] : grad_b;
                const double scale = std::max({1.0, std::abs(numeric), std::abs(analytic)});
                worst_rel = std::max(worst_rel, std::abs(numeric - analytic) / scale);
            }
        }

        std::mt19937_64 rng2(991);
        double worst_kkt = 0.0;
        for (int rep = 0; rep < 10; ++rep) {
            Matrix X;
            std::vector<int> y;
            const std::size_t per_side = 15;
            for (std::size_t i = 0; i < 2 * per_side; ++i) {
                const double side = i < per_side ? -2.0 : 2.0;
                X.push_row(std::vector<double>{side + unit(rng2) - 0.5, side + unit(rng2) - 0.5});
                y.push_back(i < per_side ? -1 : 1);
            }
            HyperParams hp;
            hp.base_kind = BaseKind::SvmRbf;
            hp.c_reg = 1.0;
            hp.gamma = 0.5;
            const auto clf = fit_svm_rbf(X, y, hp);
            worst_kkt = std::max(worst_kkt, svm_kkt_violation(clf, X, y, hp.c_reg));
        }

        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = worst_rel <= 1e-3 && worst_kkt <= 1e-2 && secs < 10.0;
        return std::make_pair(pass, "gradient rel err " + fmt(worst_rel, 6) +
                                        " (cap 1e-3) on 20 problems; optimality violation " +
                                        fmt(worst_kkt, 6) + " (cap 1e-2) on 10 problems; " +
                                        fmt(secs, 1) + "s (budget 10s)");
    });

    check(8, "splits partition exactly; normalizer zeroes train statistics", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(555);
        bool ok = true;
        std::string first_problem;
        auto flag = [&](bool cond, const std::string& what) {
            if (!cond && first_problem.empty()) {
                first_problem = what;
            }
            ok = ok && cond;
        };

        for (int rep = 0; rep < 50; ++rep) {
            const std::size_t classes = 3 + rng() % 4;
            const std::size_t per_class = 8 + rng() % 33;
            const std::size_t dims = 2 + rng() % 3;
            LabeledDataset data;
            for (std::size_t c = 0; c < classes; ++c) {
                for (std::size_t i = 0; i < per_class; ++i) {
                    std::vector<double> row(dims);
                    for (auto& v : row) {
                        v = 10.0 * unit(rng) - 5.0 + static_cast<double>(c);
                    }
                    data.add({row, static_cast<ClassId>(c)});
                }
            }

            const std::size_t k = 2 + rng() % 4;
            const auto folds = stratified_folds(data, k, rng());
            std::vector<std::size_t> covered;
            for (const FoldSplit& fold : folds) {
                covered.insert(covered.end(), fold.test.begin(), fold.test.end());
                flag(fold.train.size() + fold.test.size() == data.size(),
                     "fold train+test misses rows");
                std::set<std::size_t> train_set(fold.train.begin(), fold.train.end());
                for (std::size_t idx : fold.test) {
                    flag(train_set.count(idx) == 0, "fold test leaks into train");
                }
                // per-class test share of n/k, allowing the rounding row
                std::map<ClassId, std::size_t> per_class_test;
                for (std::size_t idx : fold.test) {
                    ++per_class_test[data[idx].label];
                }
                for (const auto& [cls, count] : per_class_test) {
                    const std::size_t lo = per_class / k;
                    flag(count == lo || count == lo + 1, "fold class share off by more than 1");
                }
            }
            std::sort(covered.begin(), covered.end());
            flag(covered.size() == data.size(), "fold tests do not cover the dataset");
            for (std::size_t i = 0; i < covered.size(); ++i) {
                flag(covered[i] == i, "fold tests overlap");
            }

            const std::array<double, 3> fractions{0.5, 0.3, 0.2};
            const auto stages = split_msets(data, fractions, rng());
            flag(stages[0].size() + stages[1].size() + stages[2].size() == data.size(),
                 "stages do not partition");
            for (std::size_t s = 0; s < 3; ++s) {
                for (const auto& [cls, positions] : stages[s].class_index()) {
                    const double target = fractions[s] * static_cast<double>(per_class);
                    flag(std::abs(static_cast<double>(positions.size()) - target) <= 1.0,
                         "stage class share off by more than 1");
                }
            }

            const Normalizer norm = fit_normalizer(data);
            const LabeledDataset scaled = apply_normalizer(norm, data);
            for (std::size_t j = 0; j < scaled.dimension(); ++j) {
                double mean = 0.0;
                for (const auto& ex : scaled.examples()) {
                    mean += ex.features[j];
                }
                mean /= static_cast<double>(scaled.size());
                double var = 0.0;
                for (const auto& ex : scaled.examples()) {
                    var += (ex.features[j] - mean) * (ex.features[j] - mean);
                }
                var /= static_cast<double>(scaled.size());
                flag(std::abs(mean) <= 1e-9, "normalized column mean above 1e-9");
                flag(std::abs(std::sqrt(var) - 1.0) <= 1e-9,
                     "normalized column stddev off 1 by more than 1e-9");
            }
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = ok && secs < 5.0;
        return std::make_pair(pass, (ok ? std::string("50 randomized datasets clean")
                                        : "first failure: " + first_problem) +
                                        "; " + fmt(secs, 1) + "s (budget 5s)");
    });

    check(9, "same-seed benchmark runs emit identical quality fields", [&] {
        if (cli.empty()) {
            return std::make_pair(false, std::string("CLI path missing (expected as argv[1])"));
        }
        const std::string out1 = "/tmp/ovkit_acceptance_run1.csv";
        const std::string out2 = "/tmp/ovkit_acceptance_run2.csv";
        const std::string base_cmd =
            "\"" + cli +
            "\" bench --experiment 1a --dataset clusters_far --paradigms ovr,scl --bases lr"
            " --seed 7 --folds 3 --points 40 --c-grid 0.1,1 --out ";
        const int rc1 = std::system((base_cmd + out1 + " 2>/dev/null").c_str());
        const int rc2 = std::system((base_cmd + out2 + " 2>/dev/null").c_str());
        if (rc1 != 0 || rc2 != 0) {
            return std::make_pair(false, "bench runs exited " + std::to_string(rc1) + " and " +
                                             std::to_string(rc2));
        }
        const auto fields1 = quality_fields_of_csv(out1);
        const auto fields2 = quality_fields_of_csv(out2);
        std::remove(out1.c_str());
        std::remove(out2.c_str());
        const bool pass = !fields1.empty() && fields1 == fields2;
        return std::make_pair(pass, std::to_string(fields1.size()) +
                                        " rows compared byte-wise on accuracy,macro_f1: " +
                                        (pass ? "identical" : "MISMATCH"));
    });

    check(10, "fine-tuning on the new batch alone never beats retraining", [&] {
        if (!close_svm_a || !close_svm_b) {
            return std::make_pair(false,
                                  std::string("close-cluster benchmark runs unavailable"));
        }
        bool pass = true;
        std::string detail;
        for (Paradigm p : kAllParadigms) {
            const double full = acc_at(*close_svm_a, p, BaseKind::SvmRbf, "M=2");
            const double tuned = acc_at(*close_svm_b, p, BaseKind::SvmRbf, "M=2");
            pass = pass && tuned <= full + 0.01;
            detail += to_string(p) + " " + fmt(tuned) + "<=" + fmt(full) + "+0.01; ";
        }
        return std::make_pair(pass, detail + "(final stage, SVM)");
    });

    std::printf("%d of 10 checks failed\n", failures);
    return failures;
}
