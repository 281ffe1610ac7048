#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "allserp/attribution.hpp"
#include "allserp/core_model.hpp"
#include "allserp/labeler.hpp"
#include "allserp/segmentation.hpp"

namespace allserp {

struct AoiStats {
  int n_fixations = 0;
  bool fixated = false;
  bool regressive = false;
  bool above_fold = false;
  int n_clicks = 0;
};

/// All AOI-level outcomes of one trial under one flavor.
struct FlavorResult {
  Flavor flavor = Flavor::typed;
  std::vector<TypedAoi> aois;
  std::vector<AoiStats> stats;  // parallel to aois
  std::vector<AttributionResult> clicks;
  std::vector<std::optional<std::string>> fixation_aoi;  // parallel to fixations
  TrialClickStatus status;
};

struct RegistrationRecord {
  bool has_final_click = false;
  int n_in_window = 0;
  std::optional<double> min_lead_distance;
  std::optional<double> concurrent_distance;
};

struct SnippetFeatures {
  double type_token_ratio = 0.0;
  double query_token_overlap = 0.0;
};

struct ContentFeatureRow {
  std::string aoi_id;
  int position = -1;
  Etype etype = Etype::unknown_widget;
  SnippetFeatures features;
};

struct TrialResult {
  TrialMeta meta;
  std::string trial_dir;  // input directory name, empty outside run_corpus
  std::vector<AdRect> ad_rects;
  std::vector<FixationEvent> fixations;
  std::vector<ClickEvent> clicks;
  std::vector<CursorEvent> cursor;

  ColumnBounds column;
  std::vector<CardSpan> spans;
  std::vector<EtypeLabel> labels;
  std::map<int, int> tier_counts;  // tier -> card count
  std::vector<std::string> warnings;
  std::vector<Violation> validation_warnings;

  FlavorResult typed;
  FlavorResult typed_gapfill;
  FlavorResult organic_hybrid;

  RegistrationRecord registration;
  std::vector<ContentFeatureRow> content_features;

  const FlavorResult& flavor(Flavor f) const {
    switch (f) {
      case Flavor::typed: return typed;
      case Flavor::typed_gapfill: return typed_gapfill;
      case Flavor::organic_hybrid: return organic_hybrid;
    }
    return typed;
  }
};

}  // namespace allserp
