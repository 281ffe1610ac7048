#include "allserp/config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace allserp {
namespace {

using nlohmann::json;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) throw std::invalid_argument(fmt::format("config: {} must be an object", where));
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || k == a;
    if (!ok) throw std::invalid_argument(fmt::format("config: unknown key {}.{}", where, k));
  }
}

template <typename T>
void take(const json& obj, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, int> || std::is_same_v<T, long>) {
    if (!v.is_number_integer()) throw std::invalid_argument(fmt::format("config: {} must be an integer", key));
  } else {
    if (!v.is_number()) throw std::invalid_argument(fmt::format("config: {} must be a number", key));
  }
  dst = v.get<T>();
}

}  // namespace

void apply_config(PipelineConfig& cfg, const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, {"version", "segmentation", "attribution", "ad_iou_threshold", "registration", "rules"},
             "<root>");
  if (doc.contains("version") && doc["version"] != 1) {
    throw std::invalid_argument("config: unsupported version");
  }
  if (doc.contains("segmentation")) {
    const json& s = doc["segmentation"];
    check_keys(s, {"activity_threshold", "min_gap_rows", "min_card_height", "composite_trigger_height",
                   "min_split_rows"},
               "segmentation");
    take(s, "activity_threshold", cfg.segmentation.activity_threshold);
    take(s, "min_gap_rows", cfg.segmentation.min_gap_rows);
    take(s, "min_card_height", cfg.segmentation.min_card_height);
    take(s, "composite_trigger_height", cfg.segmentation.composite_trigger_height);
    take(s, "min_split_rows", cfg.segmentation.min_split_rows);
  }
  if (doc.contains("attribution")) {
    const json& a = doc["attribution"];
    check_keys(a, {"tolerance_x", "tolerance_y", "pathological_slack"}, "attribution");
    take(a, "tolerance_x", cfg.attribution.tolerance_x);
    take(a, "tolerance_y", cfg.attribution.tolerance_y);
    take(a, "pathological_slack", cfg.attribution.pathological_slack);
  }
  take(doc, "ad_iou_threshold", cfg.ad_iou_threshold);
  if (doc.contains("registration")) {
    const json& r = doc["registration"];
    check_keys(r, {"window_ms", "threshold_px"}, "registration");
    take(r, "window_ms", cfg.registration.window_ms);
    take(r, "threshold_px", cfg.registration.threshold_px);
  }
  if (doc.contains("rules")) {
    if (!doc["rules"].is_string()) throw std::invalid_argument("config: rules must be a path string");
    std::filesystem::path p = doc["rules"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    use_rules_file(cfg, p);
  }
}

void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(fmt::format("config {}: {}", path.string(), e.what()));
  }
  apply_config(cfg, doc, path.parent_path());
}

void use_rules_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::string text = slurp(path);
  cfg.rules = parse_rules(text);
  cfg.rules_text = std::move(text);
  cfg.rules_source = path.filename().string();
}

json config_to_json(const PipelineConfig& cfg) {
  json j;
  j["version"] = 1;
  j["segmentation"] = {
      {"activity_threshold", cfg.segmentation.activity_threshold},
      {"min_gap_rows", cfg.segmentation.min_gap_rows},
      {"min_card_height", cfg.segmentation.min_card_height},
      {"composite_trigger_height", cfg.segmentation.composite_trigger_height},
      {"min_split_rows", cfg.segmentation.min_split_rows},
  };
  j["attribution"] = {
      {"tolerance_x", cfg.attribution.tolerance_x},
      {"tolerance_y", cfg.attribution.tolerance_y},
      {"pathological_slack", cfg.attribution.pathological_slack},
  };
  j["ad_iou_threshold"] = cfg.ad_iou_threshold;
  j["registration"] = {
      {"window_ms", cfg.registration.window_ms},
      {"threshold_px", cfg.registration.threshold_px},
  };
  j["rules"] = {
      {"source", cfg.rules_source},
      {"version", cfg.rules.version},
      {"fnv1a64", fnv1a_hex(cfg.rules_text)},
  };
  return j;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace allserp
