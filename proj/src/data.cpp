#include "ovkit/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace ovkit {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])) != 0) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])) != 0) {
        --b;
    }
    return s.substr(a, b - a);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

} // namespace

double next_unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void deterministic_shuffle(std::vector<std::size_t>& values, std::mt19937_64& rng) {
    if (values.size() < 2) {
        return;
    }
    for (std::size_t i = values.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(values[i], values[j]);
    }
}

LabeledDataset generate_clusters(const ClusterSpec& spec) {
    if (!(spec.radius > 0.0) || !std::isfinite(spec.radius)) {
        throw InvalidArgument("cluster radius must be positive and finite");
    }
    if (spec.points_per_cluster == 0) {
        throw InvalidArgument("points per cluster must be positive");
    }

    std::mt19937_64 rng(spec.seed);
    LabeledDataset data;
    std::vector<std::string> names;
    for (ClassId c = 0; c < 9; ++c) {
        const double cx = static_cast<double>(c % 3);
        const double cy = static_cast<double>(c / 3);
        names.push_back(std::to_string(c));
        for (std::size_t p = 0; p < spec.points_per_cluster; ++p) {
            const double u = next_unit_double(rng);
            const double v = next_unit_double(rng);
            const double r = spec.radius * std::sqrt(u);
            const double theta = 2.0 * std::numbers::pi * v;
            data.add({{cx + r * std::cos(theta), cy + r * std::sin(theta)}, c});
        }
    }
    data.set_label_names(std::move(names));
    return data;
}

LabeledDataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw EmptyFile("'" + path + "' is empty");
    }
    strip_cr(line);
    std::vector<std::string> header = split_fields(line);
    for (auto& name : header) {
        name = trim(name);
    }

    std::size_t label_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == label_column) {
            label_idx = j;
            break;
        }
    }
    if (label_idx == header.size()) {
        throw ParseError("label column '" + label_column + "' not found in '" + path + "'");
    }

    LabeledDataset data;
    std::vector<std::string> names;
    std::map<std::string, ClassId> ids;

    std::size_t row = 1; // header was row 1
    while (std::getline(in, line)) {
        ++row;
        strip_cr(line);
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> cells = split_fields(line);
        if (cells.size() < header.size()) {
            throw ParseError("row " + std::to_string(row) + " is missing a value for column '" +
                             header[cells.size()] + "'");
        }
        if (cells.size() > header.size()) {
            throw ParseError("row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " fields, expected " +
                             std::to_string(header.size()));
        }

        LabeledExample ex;
        ex.features.reserve(header.size() - 1);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const std::string cell = trim(cells[j]);
            if (j == label_idx) {
                if (cell.empty()) {
                    throw ParseError("row " + std::to_string(row) + " has an empty label");
                }
                const auto it = ids.find(cell);
                if (it != ids.end()) {
                    ex.label = it->second;
                } else {
                    ex.label = static_cast<ClassId>(names.size());
                    ids.emplace(cell, ex.label);
                    names.push_back(cell);
                }
                continue;
            }
            if (cell.empty()) {
                throw ParseError("row " + std::to_string(row) + " is missing a value for column '" +
                                 header[j] + "'");
            }
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                throw NonNumericFeature("row " + std::to_string(row) + ", column '" + header[j] +
                                        "': '" + cell + "' is not a number");
            }
            if (!std::isfinite(v)) {
                throw NonNumericFeature("row " + std::to_string(row) + ", column '" + header[j] +
                                        "': non-finite value");
            }
            ex.features.push_back(v);
        }
        data.add(std::move(ex));
    }

    if (data.empty()) {
        throw EmptyFile("'" + path + "' has no data rows");
    }
    data.set_label_names(std::move(names));
    return data;
}

void save_csv(const LabeledDataset& data, const std::string& path,
              const std::string& label_column) {
    if (data.empty()) {
        throw EmptyInput("refusing to write an empty dataset");
    }
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    const std::size_t d = data.dimension();
    for (std::size_t j = 0; j < d; ++j) {
        out << 'f' << j << ',';
    }
    out << label_column << '\n';

    char buf[40];
    for (const auto& ex : data.examples()) {
        for (double v : ex.features) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << ',';
        }
        out << data.name_of(ex.label) << '\n';
    }
    if (!out) {
        throw ParseError("failed while writing '" + path + "'");
    }
}

Normalizer fit_normalizer(const LabeledDataset& train, const std::set<std::size_t>& onehot_columns) {
    if (train.empty()) {
        throw EmptyInput("cannot fit a normalizer on an empty dataset");
    }
    const std::size_t d = train.dimension();
    const double n = static_cast<double>(train.size());

    Normalizer norm;
    norm.mean.assign(d, 0.0);
    norm.stddev.assign(d, 0.0);
    norm.passthrough.assign(d, false);

    for (const auto& ex : train.examples()) {
        for (std::size_t j = 0; j < d; ++j) {
            norm.mean[j] += ex.features[j];
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        norm.mean[j] /= n;
    }
    for (const auto& ex : train.examples()) {
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = ex.features[j] - norm.mean[j];
            norm.stddev[j] += diff * diff;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        norm.stddev[j] = std::sqrt(norm.stddev[j] / n);
        norm.passthrough[j] = onehot_columns.count(j) != 0 || norm.stddev[j] == 0.0;
    }
    return norm;
}

LabeledDataset apply_normalizer(const Normalizer& norm, const LabeledDataset& data) {
    if (data.empty()) {
        return data;
    }
    if (data.dimension() != norm.dimension()) {
        throw DimensionMismatch("normalizer of dimension " + std::to_string(norm.dimension()) +
                                " applied to data of dimension " +
                                std::to_string(data.dimension()));
    }
    LabeledDataset out;
    out.set_label_names(data.label_names());
    for (const auto& ex : data.examples()) {
        LabeledExample copy = ex;
        for (std::size_t j = 0; j < copy.features.size(); ++j) {
            if (!norm.passthrough[j]) {
                copy.features[j] = (copy.features[j] - norm.mean[j]) / norm.stddev[j];
            }
        }
        out.add(std::move(copy));
    }
    return out;
}

std::vector<FoldSplit> stratified_folds(const LabeledDataset& data, std::size_t k,
                                        std::uint64_t seed) {
    if (k < 2) {
        throw InvalidArgument("need at least 2 folds");
    }
    if (data.empty()) {
        throw EmptyInput("cannot split an empty dataset");
    }
    for (const auto& [id, positions] : data.class_index()) {
        if (positions.size() < k) {
            throw ClassTooSmall("class '" + data.name_of(id) + "' has " +
                                std::to_string(positions.size()) + " examples for " +
                                std::to_string(k) + " folds");
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> fold_of(data.size(), 0);
    for (const auto& [id, positions] : data.class_index()) {
        std::vector<std::size_t> shuffled = positions;
        deterministic_shuffle(shuffled, rng);
        for (std::size_t idx = 0; idx < shuffled.size(); ++idx) {
            fold_of[shuffled[idx]] = idx % k;
        }
    }

    std::vector<FoldSplit> folds(k);
    for (std::size_t pos = 0; pos < data.size(); ++pos) {
        for (std::size_t f = 0; f < k; ++f) {
            if (fold_of[pos] == f) {
                folds[f].test.push_back(pos);
            } else {
                folds[f].train.push_back(pos);
            }
        }
    }
    return folds;
}

std::array<LabeledDataset, 3> split_msets(const LabeledDataset& train,
                                          const std::array<double, 3>& fractions,
                                          std::uint64_t seed) {
    double total = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) {
            throw InvalidArgument("split fractions must be positive");
        }
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidArgument("split fractions must sum to 1");
    }
    if (train.empty()) {
        throw EmptyInput("cannot split an empty dataset");
    }
    for (const auto& [id, positions] : train.class_index()) {
        if (positions.size() < 3) {
            throw ClassTooSmall("class '" + train.name_of(id) + "' has " +
                                std::to_string(positions.size()) + " examples for a 3-way split");
        }
    }

    std::mt19937_64 rng(seed);
    std::array<std::vector<std::size_t>, 3> parts;
    for (const auto& [id, positions] : train.class_index()) {
        std::vector<std::size_t> shuffled = positions;
        deterministic_shuffle(shuffled, rng);
        const double n = static_cast<double>(shuffled.size());
        const std::size_t c0 = static_cast<std::size_t>(std::llround(fractions[0] * n));
        const std::size_t c1 =
            static_cast<std::size_t>(std::llround((fractions[0] + fractions[1]) * n));
        for (std::size_t idx = 0; idx < shuffled.size(); ++idx) {
            const std::size_t part = idx < c0 ? 0 : (idx < c1 ? 1 : 2);
            parts[part].push_back(shuffled[idx]);
        }
    }

    std::array<LabeledDataset, 3> out;
    for (std::size_t p = 0; p < 3; ++p) {
        std::sort(parts[p].begin(), parts[p].end());
        out[p] = train.subset(parts[p]);
    }
    return out;
}

std::vector<ClassId> order_classes_by_frequency(const LabeledDataset& data) {
    std::vector<ClassId> ids = data.class_ids();
    std::stable_sort(ids.begin(), ids.end(), [&](ClassId a, ClassId b) {
        const std::size_t ca = data.class_index().at(a).size();
        const std::size_t cb = data.class_index().at(b).size();
        if (ca != cb) {
            return ca > cb;
        }
        const std::string na = data.name_of(a);
        const std::string nb = data.name_of(b);
        if (na != nb) {
            return na < nb;
        }
        return a < b;
    });
    return ids;
}

} // namespace ovkit
