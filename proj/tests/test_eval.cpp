#include <doctest.h>

#include "ovkit/eval.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <thread>

using namespace ovkit;

namespace {

LabeledDataset two_line_classes(std::size_t per_class, double gap, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    LabeledDataset data;
    for (std::size_t i = 0; i < per_class; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        data.add({{0.0 + 0.4 * u}, 0});
        const double v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        data.add({{gap + 0.4 * v}, 1});
    }
    return data;
}

} // namespace

TEST_CASE("accuracy counts exact matches") {
    const std::vector<ClassId> truths{0, 1, 0};
    CHECK(accuracy(truths, truths) == 1.0);

    const std::vector<ClassId> preds{0, 1, 1};
    CHECK(accuracy(preds, truths) == doctest::Approx(2.0 / 3.0));

    const std::vector<ClassId> shorter{0};
    CHECK_THROWS_AS((void)accuracy(shorter, truths), LengthMismatch);
    CHECK_THROWS_AS((void)accuracy({}, {}), EmptyInput);
}

TEST_CASE("macro f1 averages per-class scores over the classes in the truths") {
    // class 0: TP=2 FN=1 -> 4/5 ; class 1: TP=2 FP=1 -> 4/5 ; class 2: TP=1 -> 1
    const std::vector<ClassId> truths{0, 0, 0, 1, 1, 2};
    const std::vector<ClassId> preds{0, 0, 1, 1, 1, 2};
    CHECK(macro_f1(preds, truths) == doctest::Approx(13.0 / 15.0).epsilon(1e-12));

    // two classes: F1_a = 2/3, F1_b = 4/5 -> 11/15
    const std::vector<ClassId> t2{0, 0, 1, 1};
    const std::vector<ClassId> p2{0, 1, 1, 1};
    CHECK(macro_f1(p2, t2) == doctest::Approx(11.0 / 15.0).epsilon(1e-12));

    CHECK(macro_f1(truths, truths) == 1.0);
}

TEST_CASE("macro f1 handles classes that never score") {
    // every true class missed entirely: both per-class F1 are 0/0, scored 0
    const std::vector<ClassId> truths{0, 0, 1};
    const std::vector<ClassId> all_wrong{1, 1, 0};
    CHECK(macro_f1(all_wrong, truths) == 0.0);

    // a predicted label outside the truth set dilutes nothing but still
    // costs its row as a false negative of the true class
    const std::vector<ClassId> stray{0, 2, 1};
    CHECK(macro_f1(stray, truths) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)macro_f1({}, {}), EmptyInput);
}

TEST_CASE("metrics ignore the order of examples") {
    std::mt19937_64 rng(31);
    std::vector<ClassId> truths, preds;
    for (int i = 0; i < 200; ++i) {
        truths.push_back(static_cast<ClassId>(rng() % 4));
        preds.push_back(static_cast<ClassId>(rng() % 4));
    }
    const double acc = accuracy(preds, truths);
    const double f1 = macro_f1(preds, truths);

    std::vector<std::size_t> perm(truths.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<ClassId> truths2, preds2;
    for (auto i : perm) {
        truths2.push_back(truths[i]);
        preds2.push_back(preds[i]);
    }
    CHECK(accuracy(preds2, truths2) == acc);
    CHECK(macro_f1(preds2, truths2) == doctest::Approx(f1).epsilon(1e-12));
}

TEST_CASE("default rbf width is the inverse of dimension times mean variance") {
    LabeledDataset data;
    data.add({{0.0, 0.0}, 0});
    data.add({{2.0, 0.0}, 1});
    data.add({{0.0, 4.0}, 0});
    data.add({{2.0, 4.0}, 1});
    // per-feature population variances 1 and 4, mean 2.5, dimension 2
    CHECK(default_gamma(data) == doctest::Approx(0.2).epsilon(1e-12));

    LabeledDataset degenerate;
    degenerate.add({{5.0}, 0});
    degenerate.add({{5.0}, 1});
    const double g = default_gamma(degenerate); // variance floor keeps it finite
    CHECK(std::isfinite(g));
    CHECK(g > 0.0);

    CHECK_THROWS_AS((void)default_gamma(LabeledDataset{}), EmptyInput);
}

TEST_CASE("grid search returns the single candidate and the default width") {
    const auto train = two_line_classes(12, 3.0, 1);
    const std::vector<double> grid{0.5};
    const auto hp = grid_search_c(train, Paradigm::OvR, BaseKind::LogisticRegression, grid, 3, 7);
    CHECK(hp.c_reg == 0.5);
    CHECK(hp.base_kind == BaseKind::LogisticRegression);
    CHECK(hp.gamma == doctest::Approx(default_gamma(train)));
    CHECK(hp.lambda_sim == 0.02);
}

TEST_CASE("grid search breaks score ties toward the smaller constant") {
    // trivially separable data: every C scores a perfect CV accuracy
    const auto train = two_line_classes(12, 5.0, 2);
    const std::vector<double> grid{10.0, 0.01, 1.0};
    const auto hp = grid_search_c(train, Paradigm::OvR, BaseKind::LogisticRegression, grid, 3, 7);
    CHECK(hp.c_reg == 0.01);
}

TEST_CASE("grid search is deterministic per seed and validates inputs") {
    const auto train = two_line_classes(10, 1.0, 3);
    const std::vector<double> grid{0.1, 1.0, 10.0};
    const auto a = grid_search_c(train, Paradigm::OvR, BaseKind::SvmRbf, grid, 3, 42);
    const auto b = grid_search_c(train, Paradigm::OvR, BaseKind::SvmRbf, grid, 3, 42);
    CHECK(a == b);

    CHECK_THROWS_AS(
        (void)grid_search_c(train, Paradigm::OvR, BaseKind::SvmRbf, {}, 3, 42), EmptyInput);

    LabeledDataset tiny;
    tiny.add({{0.0}, 0});
    tiny.add({{1.0}, 0});
    tiny.add({{2.0}, 1});
    tiny.add({{3.0}, 1});
    CHECK_THROWS_AS(
        (void)grid_search_c(tiny, Paradigm::OvR, BaseKind::SvmRbf, grid, 3, 42), ClassTooSmall);
}

TEST_CASE("grid search finds a constant that separates far clusters") {
    const auto train = two_line_classes(15, 2.0, 4);
    const std::vector<double> grid{1e-4, 1e-2, 1.0};
    const auto hp =
        grid_search_c(train, Paradigm::OvR, BaseKind::LogisticRegression, grid, 3, 11);
    // the chosen constant must reach a clean fit on the training data
    const auto model = train_paradigm(Paradigm::OvR, group_by_class(train), hp);
    const auto preds = predict_all(model, train);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        hits += preds[i] == train[i].label ? 1 : 0;
    }
    CHECK(static_cast<double>(hits) / static_cast<double>(train.size()) >= 0.96);
}

TEST_CASE("timed reports wall-clock seconds and passes the result through") {
    const auto [value, seconds] = timed([] { return 42; });
    CHECK(value == 42);
    CHECK(seconds >= 0.0);
    CHECK(seconds < 0.1);

    const double slept = timed([] { std::this_thread::sleep_for(std::chrono::milliseconds(50)); });
    CHECK(slept >= 0.03);
    CHECK(slept < 0.5);
}
