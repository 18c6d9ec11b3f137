// Command-line front end: generate synthetic cluster data, train and apply
// individual models, and run the benchmark harness.

#include "ovkit/data.hpp"
#include "ovkit/eval.hpp"
#include "ovkit/experiments.hpp"
#include "ovkit/model_io.hpp"
#include "ovkit/paradigms.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string_view>

#include <CLI11.hpp>

namespace {

constexpr const char* kSeedEnvVar = "OVKIT_SEED";

std::set<std::size_t> parse_column_set(const std::vector<std::size_t>& columns) {
    return {columns.begin(), columns.end()};
}

void write_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) {
        throw ovkit::ParseError("cannot write '" + out_path + "'");
    }
    out << text;
}

ovkit::DatasetSpec parse_dataset_flag(const std::string& value, const std::string& label_column,
                                      const std::set<std::size_t>& onehot,
                                      std::size_t points_per_cluster) {
    ovkit::DatasetSpec spec;
    if (value.rfind("csv:", 0) == 0) {
        spec = ovkit::csv_dataset(value.substr(4), label_column);
        spec.onehot_columns = onehot;
    } else {
        spec = ovkit::cluster_variant(value);
        spec.cluster.points_per_cluster = points_per_cluster;
    }
    return spec;
}

int run_generate(const std::string& out_path, double radius, std::size_t points,
                 std::uint64_t seed, const std::string& label_column) {
    ovkit::ClusterSpec spec;
    spec.radius = radius;
    spec.points_per_cluster = points;
    spec.seed = seed;
    ovkit::save_csv(ovkit::generate_clusters(spec), out_path, label_column);
    std::cerr << "wrote " << out_path << '\n';
    return 0;
}

int run_train(const std::string& data_path, const std::string& label_column,
              const std::string& paradigm_text, const std::string& base_text, double c_reg,
              double gamma, double lambda_sim, bool no_normalize,
              const std::vector<std::size_t>& onehot, const std::string& model_out) {
    const ovkit::LabeledDataset raw = ovkit::load_csv(data_path, label_column);

    ovkit::SavedModel saved;
    ovkit::LabeledDataset train = raw;
    if (!no_normalize) {
        saved.normalizer = ovkit::fit_normalizer(raw, parse_column_set(onehot));
        train = ovkit::apply_normalizer(*saved.normalizer, raw);
    }

    ovkit::HyperParams hp;
    hp.base_kind = ovkit::parse_base_kind(base_text);
    hp.c_reg = c_reg;
    hp.gamma = gamma > 0.0 ? gamma : ovkit::default_gamma(train);
    hp.lambda_sim = lambda_sim;

    const std::vector<ovkit::ClassId> order = ovkit::order_classes_by_frequency(train);
    const ovkit::ClassOrderedData grouped = ovkit::group_by_class(train, order);
    auto [model, seconds] = ovkit::timed([&] {
        return ovkit::train_paradigm(ovkit::parse_paradigm(paradigm_text), grouped, hp);
    });
    model.label_names = train.label_names();
    saved.model = std::move(model);
    ovkit::save_model(saved, model_out);
    std::cerr << "trained " << ovkit::to_string(saved.model.paradigm) << "/"
              << ovkit::to_string(hp.base_kind) << " on " << train.size() << " examples in "
              << seconds << "s -> " << model_out << '\n';
    return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& label_column, const std::string& out_path) {
    const ovkit::SavedModel saved = ovkit::load_model(model_path);
    ovkit::LabeledDataset data = ovkit::load_csv(data_path, label_column);
    if (saved.normalizer.has_value()) {
        data = ovkit::apply_normalizer(*saved.normalizer, data);
    }

    std::ostringstream lines;
    std::size_t hits = 0;
    for (const auto& ex : data.examples()) {
        const ovkit::ClassId pred = ovkit::predict(saved.model, ex.features);
        const std::string name = pred < saved.model.label_names.size()
                                     ? saved.model.label_names[pred]
                                     : std::to_string(pred);
        lines << name << '\n';
        if (data.name_of(ex.label) == name) {
            ++hits;
        }
    }
    write_text(lines.str(), out_path);
    std::cerr << "accuracy vs file labels: "
              << static_cast<double>(hits) / static_cast<double>(data.size()) << " on "
              << data.size() << " rows\n";
    return 0;
}

int run_bench(ovkit::ExperimentConfig cfg, const std::string& format_text,
              const std::string& out_path) {
    const ovkit::ReportFormat format = format_text == "markdown"
                                           ? ovkit::ReportFormat::Markdown
                                           : ovkit::ReportFormat::Csv;
    if (format_text != "markdown" && format_text != "csv") {
        throw ovkit::InvalidArgument("unknown report format '" + format_text + "'");
    }
    const ovkit::ExperimentReport report = ovkit::run_experiment(cfg);
    write_text(ovkit::emit_report(report, format), out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary-classifier learning paradigms: data, training and benchmarks"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    // one config file for any subcommand: keys live under a [generate] /
    // [train] / [predict] / [bench] section; explicit flags override file values
    app.set_config("--config", "", "key-value config file with a [subcommand] section");

    // generate
    auto* generate = app.add_subcommand("generate", "write a synthetic cluster CSV");
    generate->fallthrough();
    double g_radius = 0.1;
    std::size_t g_points = 100;
    std::uint64_t g_seed = 42;
    std::string g_out;
    std::string g_label = "label";
    generate->add_option("--radius", g_radius, "cluster radius");
    generate->add_option("--points", g_points, "points per cluster");
    generate->add_option("--seed", g_seed, "generator seed");
    generate->add_option("--out", g_out, "output CSV path")->required();
    generate->add_option("--label-column", g_label, "label column name");

    // train
    auto* train = app.add_subcommand("train", "train one model on a CSV");
    train->fallthrough();
    std::string t_data, t_model_out;
    std::string t_paradigm = "ovr";
    std::string t_base = "lr";
    std::string t_label = "label";
    double t_c = 1.0;
    double t_gamma = 0.0;
    double t_lambda = 0.02;
    bool t_no_normalize = false;
    std::vector<std::size_t> t_onehot;
    train->add_option("--data", t_data, "training CSV")->required();
    train->add_option("--paradigm", t_paradigm, "ovr | scl | ovp | ovpsc");
    train->add_option("--base", t_base, "lr | svm");
    train->add_option("--c", t_c, "regularization constant");
    train->add_option("--gamma", t_gamma, "rbf width; 0 = derive from data");
    train->add_option("--lambda-sim", t_lambda, "similarity threshold");
    train->add_option("--label-column", t_label, "label column name");
    train->add_flag("--no-normalize", t_no_normalize, "train on raw features");
    train->add_option("--onehot-cols", t_onehot, "feature columns exempt from normalization")
         ->delimiter(',');
    train->add_option("--model-out", t_model_out, "model file to write")->required();

    // predict
    auto* predict = app.add_subcommand("predict", "apply a saved model to a CSV");
    predict->fallthrough();
    std::string p_model, p_data, p_out;
    std::string p_label = "label";
    predict->add_option("--model", p_model, "model file")->required();
    predict->add_option("--data", p_data, "input CSV")->required();
    predict->add_option("--label-column", p_label, "label column name");
    predict->add_option("--out", p_out, "write predictions here instead of stdout");

    // bench
    auto* bench = app.add_subcommand("bench", "run a benchmark experiment");
    bench->fallthrough();
    std::string b_experiment = "1a";
    std::string b_dataset = "clusters_veryFar";
    std::vector<std::string> b_paradigms;
    std::vector<std::string> b_bases;
    std::uint64_t b_seed = 42;
    std::string b_format = "csv";
    std::string b_out;
    std::string b_label = "label";
    std::size_t b_folds = 5;
    std::size_t b_points = 100;
    double b_lambda = 0.02;
    std::vector<double> b_grid;
    std::vector<std::size_t> b_onehot;
    bool b_per_fold = false;
    bench->add_option("--experiment", b_experiment, "1a | 1b | 1c | 2");
    bench->add_option("--dataset", b_dataset,
                      "clusters_veryFar | clusters_far | clusters_close | "
                      "clusters_intersecting | csv:<path>");
    bench->add_option("--paradigms", b_paradigms, "subset of ovr,scl,ovp,ovpsc")
         ->delimiter(',');
    bench->add_option("--bases", b_bases, "subset of lr,svm")->delimiter(',');
    auto* seed_opt = bench->add_option("--seed", b_seed, "run seed");
    bench->add_option("--folds", b_folds, "outer cross-validation folds");
    bench->add_option("--points", b_points, "points per generated cluster");
    bench->add_option("--lambda-sim", b_lambda, "similarity threshold");
    bench->add_option("--c-grid", b_grid, "regularization grid")->delimiter(',');
    bench->add_option("--label-column", b_label, "label column for csv datasets");
    bench->add_option("--onehot-cols", b_onehot, "feature columns exempt from normalization")
         ->delimiter(',');
    bench->add_option("--format", b_format, "csv | markdown");
    bench->add_option("--out", b_out, "write the report here instead of stdout");
    bench->add_flag("--per-fold", b_per_fold, "add per-fold detail rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help text, or the message for --help itself
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) {
            return run_generate(g_out, g_radius, g_points, g_seed, g_label);
        }
        if (train->parsed()) {
            return run_train(t_data, t_label, t_paradigm, t_base, t_c, t_gamma, t_lambda,
                             t_no_normalize, t_onehot, t_model_out);
        }
        if (predict->parsed()) {
            return run_predict(p_model, p_data, p_label, p_out);
        }
        if (bench->parsed()) {
            ovkit::ExperimentConfig cfg;
            cfg.experiment = ovkit::parse_experiment(b_experiment);
            cfg.dataset = parse_dataset_flag(b_dataset, b_label, parse_column_set(b_onehot),
                                             b_points);
            if (!b_paradigms.empty()) {
                cfg.paradigms.clear();
                for (const auto& p : b_paradigms) {
                    cfg.paradigms.push_back(ovkit::parse_paradigm(p));
                }
            }
            if (!b_bases.empty()) {
                cfg.base_kinds.clear();
                for (const auto& b : b_bases) {
                    cfg.base_kinds.push_back(ovkit::parse_base_kind(b));
                }
            }
            cfg.folds = b_folds;
            cfg.lambda_sim = b_lambda;
            cfg.per_fold_detail = b_per_fold;
            if (!b_grid.empty()) {
                cfg.c_grid = b_grid;
            }

            // CLI11 counts config-file values too, so check argv to tell a
            // real command-line flag apart from a config-file entry.
            bool seed_flag_on_cmdline = false;
            for (int i = 1; i < argc; ++i) {
                const std::string_view arg = argv[i];
                if (arg == "--seed" || arg.rfind("--seed=", 0) == 0) {
                    seed_flag_on_cmdline = true;
                    break;
                }
            }
            cfg.seed = b_seed;
            cfg.seed_source = seed_flag_on_cmdline ? "flag"
                              : seed_opt->count() > 0 ? "config"
                                                      : "default";
            if (seed_opt->count() == 0) {
                // environment override applies only when no explicit flag was given
                if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
                    char* end = nullptr;
                    const unsigned long long v = std::strtoull(env, &end, 10);
                    if (end == env || *end != '\0') {
                        throw ovkit::InvalidArgument(std::string(kSeedEnvVar) +
                                                     " is not an unsigned integer");
                    }
                    cfg.seed = v;
                    cfg.seed_source = "env";
                }
            }
            return run_bench(std::move(cfg), b_format, b_out);
        }
    } catch (const ovkit::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
