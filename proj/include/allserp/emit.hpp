#pragma once

// Output artifacts. Everything here is a pure function of the in-memory
// results and the effective config, so repeated runs emit identical bytes.

#include <filesystem>
#include <string>
#include <vector>

#include "allserp/config.hpp"
#include "allserp/csv.hpp"
#include "allserp/pipeline.hpp"
#include "json.hpp"

namespace allserp {

inline constexpr std::string_view kCorpusCsvHeader =
    "trial_id,aoi_id,etype,position,x,y,w,h,flavor,source,fixated,n_fixations,regressive,"
    "above_fold,n_clicks_attributed";

std::string corpus_csv_name(Flavor flavor);  // aois_by_trial_id_<flavor>.csv

/// Rows without the header, sorted by (trial_id, position, y0).
std::vector<csv::Row> corpus_csv_rows(const std::vector<TrialResult>& trials, Flavor flavor);
std::string corpus_csv(const std::vector<TrialResult>& trials, Flavor flavor);

/// Provenance block shared by every report.
nlohmann::json provenance(const PipelineConfig& cfg);

/// Per-trial document; screenshot_ref is stored verbatim for the viewer.
nlohmann::json trial_json(const TrialResult& trial, const PipelineConfig& cfg,
                          const std::string& screenshot_ref);

/// File-system-safe form of a trial id.
std::string trial_file_stem(std::string_view trial_id);

std::string inventory_csv(const InventoryTable& table);
nlohmann::json inventory_json(const InventoryTable& table, Flavor flavor, const PipelineConfig& cfg);
nlohmann::json position_rates_json(const std::vector<TrialResult>& trials, const PipelineConfig& cfg);
nlohmann::json ad_consistency_json(const std::vector<TrialResult>& trials, const PipelineConfig& cfg);
nlohmann::json registration_json(const std::vector<TrialResult>& trials, const PipelineConfig& cfg);
std::string dropped_trials_csv(const std::vector<DroppedTrial>& dropped);
std::string trial_flags_csv(const std::vector<TrialResult>& trials);
std::string content_features_csv(const std::vector<TrialResult>& trials);

struct EmitOptions {
  std::vector<Flavor> flavors{Flavor::typed, Flavor::typed_gapfill, Flavor::organic_hybrid};
  bool corpus_csvs = true;
  bool trial_jsons = true;
  bool inventory = true;
  bool audit = true;
  // Root of the trial directories; used to reference screenshots relative
  // to each emitted JSON.
  std::filesystem::path input_dir;
};

/// Writes the selected artifacts under out_dir (created when missing).
void emit_artifacts(const std::filesystem::path& out_dir, const CorpusResult& corpus,
                    const PipelineConfig& cfg, const EmitOptions& options);

void write_text_file(const std::filesystem::path& path, std::string_view text);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace allserp
