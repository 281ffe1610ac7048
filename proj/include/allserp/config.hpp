#pragma once

// Effective run configuration. Layering: built-in defaults, then a JSON
// config file, then CLI flags; each layer overwrites only the keys it sets.
//
// Config file (version 1):
//   {
//     "version": 1,
//     "segmentation": {"activity_threshold": 2.0, "min_gap_rows": 8,
//                      "min_card_height": 24, "composite_trigger_height": 350,
//                      "min_split_rows": 4},
//     "attribution": {"tolerance_x": 5, "tolerance_y": 10,
//                     "pathological_slack": 50},
//     "ad_iou_threshold": 0.5,
//     "registration": {"window_ms": 1500, "threshold_px": 250.0},
//     "rules": "path/to/rules.json"      (relative to the config file)
//   }

#include <filesystem>
#include <string>
#include <string_view>

#include "allserp/attribution.hpp"
#include "allserp/inventory.hpp"
#include "allserp/labeler.hpp"
#include "allserp/segmentation.hpp"
#include "json.hpp"

namespace allserp {

struct PipelineConfig {
  SegmentationParams segmentation;
  AttributionParams attribution;
  double ad_iou_threshold = 0.5;
  RegistrationParams registration;
  LabelRules rules = default_rules();
  // "builtin" or the file name the rules were loaded from.
  std::string rules_source = "builtin";
  std::string rules_text = std::string(default_rules_text());
};

/// Overlays a config document onto cfg. Throws std::invalid_argument on
/// unknown keys, wrong types or an unsupported version.
void apply_config(PipelineConfig& cfg, const nlohmann::json& doc,
                  const std::filesystem::path& base_dir = {});
void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

/// Replaces the rules with the file at path.
void use_rules_file(PipelineConfig& cfg, const std::filesystem::path& path);

/// The effective configuration as a JSON object (rules identified by source,
/// version and a content hash).
nlohmann::json config_to_json(const PipelineConfig& cfg);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

}  // namespace allserp
