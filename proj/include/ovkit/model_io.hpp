#pragma once

#include "ovkit/data.hpp"
#include "ovkit/model.hpp"

#include <optional>

namespace ovkit {

/// A trained model plus the feature normalizer it expects its inputs to have
/// gone through (absent when training ran on raw features).
struct SavedModel {
    ParadigmModel model;
    std::optional<Normalizer> normalizer;

    bool operator==(const SavedModel&) const = default;
};

/// Versioned JSON serialization; doubles round-trip exactly. Loading checks
/// the format marker and version and re-validates model invariants, throwing
/// ParseError on malformed input.
void save_model(const SavedModel& saved, const std::string& path);
SavedModel load_model(const std::string& path);

std::string model_to_json(const SavedModel& saved);
SavedModel model_from_json(const std::string& text);

} // namespace ovkit
