#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trendcast/cascade.hpp"
#include "trendcast/wavelet.hpp"

namespace trendcast {

enum class SelectionMode { All, TopPeriodic, TopWeighted };

struct SelectionSpec {
    SelectionMode mode = SelectionMode::All;
    int k = 10;
    std::string base_target;  // target of the ALL-features base model (TopWeighted)
};

// How selection context is computed inside cross-validation: once on all
// usable rows, or refit per training fold.
enum class SelectionScope { Global, PerFold };

// Context for a selection call: exactly one member is needed per mode.
struct SelectionContext {
    std::optional<std::vector<std::pair<std::string, PeriodicityScore>>> periodicity;
    std::optional<WienerCascadeModel> base_model;
};

// Parse `all | periodic:10 | weighted:10`.
SelectionSpec parse_selection_spec(const std::string& text);
std::string selection_spec_to_string(const SelectionSpec& spec);

std::vector<std::string> select_features(const Dataset& d, const SelectionSpec& spec,
                                         const SelectionContext& context);

}  // namespace trendcast
