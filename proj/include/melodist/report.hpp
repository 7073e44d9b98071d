#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "melodist/metric.hpp"

namespace melodist {

nlohmann::json summary_json(const EvalReport& report, const DistanceSpec& spec);
nlohmann::json census_json(const CensusReport& census, const DistanceSpec& spec);

// One `pair_kind,distance` row per sampled pair, in-class rows first.
std::string distances_csv(const EvalReport& report);

// Overlaid in-class / cross-class histograms as a standalone SVG document.
std::string histogram_svg(const EvalReport& report, const std::string& title);

// Writes distances.csv, summary.json and histogram.svg into `dir`.
void write_eval_report(const std::filesystem::path& dir, const EvalReport& report, const DistanceSpec& spec);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace melodist
