#pragma once

#include "ovkit/core.hpp"

#include <array>
#include <random>

namespace ovkit {

// ---------------------------------------------------------------------------
// Synthetic clusters
// ---------------------------------------------------------------------------

/// Nine circular clusters of 2-D points, one class each, centered on the
/// integer grid {0,1,2} x {0,1,2}. Points are uniform over a disc of the
/// given radius. Radius 0.1 keeps clusters very far apart, 0.4 far apart,
/// 0.5 touching and 0.525 intersecting.
struct ClusterSpec {
    double radius = 0.1;
    std::size_t points_per_cluster = 100;
    std::uint64_t seed = 0;
};

LabeledDataset generate_clusters(const ClusterSpec& spec);

/// Uniform double in [0, 1) built from the top 53 bits of the generator
/// output; identical across platforms for a given seed.
double next_unit_double(std::mt19937_64& rng);

/// In-place Fisher-Yates shuffle driven by the same generator; avoids the
/// implementation-defined standard-library shuffle.
void deterministic_shuffle(std::vector<std::size_t>& values, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// CSV input / output
// ---------------------------------------------------------------------------

/// Reads a comma-separated file with a header row. All columns except the
/// label column become features in file order; labels get dense class ids by
/// first appearance and the original strings are kept as label names.
/// Cells must be plain numbers (no quoting); non-numeric or non-finite
/// feature cells, missing cells and a missing label column are rejected with
/// the offending row and column named.
LabeledDataset load_csv(const std::string& path, const std::string& label_column = "label");

/// Writes features (f0, f1, ...) plus the label column with original label
/// names, round-tripping double precision exactly.
void save_csv(const LabeledDataset& data, const std::string& path,
              const std::string& label_column = "label");

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Per-feature shift/scale to zero mean and unit standard deviation
/// (population variant), fitted on training data only. Columns listed as
/// one-hot and columns with zero variance pass through unchanged.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> passthrough;

    std::size_t dimension() const { return mean.size(); }

    bool operator==(const Normalizer&) const = default;
};

Normalizer fit_normalizer(const LabeledDataset& train,
                          const std::set<std::size_t>& onehot_columns = {});

LabeledDataset apply_normalizer(const Normalizer& norm, const LabeledDataset& data);

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

/// Index sets for one cross-validation fold.
struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// K folds whose test parts partition the dataset and preserve per-class
/// proportions up to rounding. Assignment shuffles each class once with the
/// seeded generator, then deals positions round-robin.
std::vector<FoldSplit> stratified_folds(const LabeledDataset& data, std::size_t k,
                                        std::uint64_t seed);

/// Stratified split of a training set into three parts with the given
/// fractions (default 50% / 30% / 20%).
std::array<LabeledDataset, 3> split_msets(const LabeledDataset& train,
                                          const std::array<double, 3>& fractions = {0.5, 0.3,
                                                                                    0.2},
                                          std::uint64_t seed = 0);

/// Class ids sorted by descending example count; ties break on ascending
/// label name. This is the order in which classes enter the models.
std::vector<ClassId> order_classes_by_frequency(const LabeledDataset& data);

} // namespace ovkit
