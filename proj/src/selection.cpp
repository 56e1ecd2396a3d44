#include "trendcast/selection.hpp"

#include <algorithm>
#include <stdexcept>

namespace trendcast {

SelectionSpec parse_selection_spec(const std::string& text) {
    SelectionSpec spec;
    if (text == "all") {
        spec.mode = SelectionMode::All;
        return spec;
    }
    auto parse_k = [&](const std::string& prefix) -> int {
        std::string num = text.substr(prefix.size());
        std::size_t pos = 0;
        int k = std::stoi(num, &pos);
        if (pos != num.size() || k < 1) throw std::invalid_argument("bad selection count");
        return k;
    };
    if (text.rfind("periodic:", 0) == 0) {
        spec.mode = SelectionMode::TopPeriodic;
        spec.k = parse_k("periodic:");
        return spec;
    }
    if (text.rfind("weighted:", 0) == 0) {
        spec.mode = SelectionMode::TopWeighted;
        spec.k = parse_k("weighted:");
        return spec;
    }
    throw std::invalid_argument("bad selection spec '" + text +
                                "' (expected all | periodic:<k> | weighted:<k>)");
}

std::string selection_spec_to_string(const SelectionSpec& spec) {
    switch (spec.mode) {
        case SelectionMode::All: return "all";
        case SelectionMode::TopPeriodic: return "periodic:" + std::to_string(spec.k);
        case SelectionMode::TopWeighted: return "weighted:" + std::to_string(spec.k);
    }
    return "all";
}

std::vector<std::string> select_features(const Dataset& d, const SelectionSpec& spec,
                                         const SelectionContext& context) {
    auto predictors = d.predictor_names();
    if (predictors.empty()) throw std::invalid_argument("select_features: no predictors");

    if (spec.mode == SelectionMode::All) return predictors;

    if (spec.k < 1 || spec.k > static_cast<int>(predictors.size())) {
        throw std::invalid_argument("selection k=" + std::to_string(spec.k) + " exceeds " +
                                    std::to_string(predictors.size()) + " predictors");
    }

    if (spec.mode == SelectionMode::TopPeriodic) {
        if (!context.periodicity) {
            throw std::invalid_argument("TOP_PERIODIC selection needs a periodicity report");
        }
        std::vector<std::string> out;
        for (const auto& [name, score] : *context.periodicity) {
            if (static_cast<int>(out.size()) == spec.k) break;
            out.push_back(name);
        }
        if (static_cast<int>(out.size()) < spec.k) {
            throw std::invalid_argument("periodicity report smaller than k");
        }
        return out;
    }

    // TopWeighted: top k by importance from the ALL-features base model.
    if (!context.base_model) {
        throw std::invalid_argument("TOP_WEIGHTED selection needs an ALL-features base model");
    }
    auto importance = feature_importance(*context.base_model);
    std::stable_sort(importance.begin(), importance.end(),
                     [](const ImportanceEntry& a, const ImportanceEntry& b) {
                         return a.rank < b.rank;
                     });
    std::vector<std::string> out;
    for (const auto& e : importance) {
        if (static_cast<int>(out.size()) == spec.k) break;
        out.push_back(e.name);
    }
    if (static_cast<int>(out.size()) < spec.k) {
        throw std::invalid_argument("base model has fewer features than k");
    }
    return out;
}

}  // namespace trendcast
