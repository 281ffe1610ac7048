#pragma once

// Corpus-level aggregates: the per-etype behavioral inventory, click rate by
// position, Spearman correlation, the gaze-cursor registration probe, the ad
// internal-consistency audit and snippet lexical features.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "allserp/core_model.hpp"
#include "allserp/trial_result.hpp"

namespace allserp {

struct InventoryRow {
  Etype etype = Etype::unknown_widget;
  long n_aois = 0;
  long n_fixated = 0;
  long n_regressive = 0;
  long n_clicks = 0;
  long n_trials_above_fold = 0;
  double fixated_pct = 0.0;
  double click_pct = 0.0;
  std::optional<double> regressive_pct;  // absent when nothing was fixated
  double above_fold_pct = 0.0;
};

struct InventoryTable {
  long n_trials = 0;
  long total_clicks_attributed = 0;
  std::vector<InventoryRow> rows;  // n_aois descending
};

/// Denominators: fixated % over the etype's AOIs; click % over all
/// AOI-attributed click events (intermediate clicks included); regressive %
/// over the etype's fixated AOIs; above-fold % over trials.
InventoryTable etype_inventory(const std::vector<TrialResult>& trials,
                               Flavor flavor = Flavor::typed_gapfill);

enum class PositionConvention { organic_only, all_main_axis };
std::string_view to_string(PositionConvention c);

struct PositionBucket {
  std::string label;  // "0".."9" or "10+"
  long n_aois = 0;
  long n_clicked = 0;
  std::optional<double> click_rate;
};

struct PositionRates {
  PositionConvention convention = PositionConvention::organic_only;
  Flavor flavor = Flavor::typed_gapfill;
  std::vector<PositionBucket> buckets;  // 0..9 then 10+
  long total_aois_0_9 = 0;
  std::optional<double> rho;
};

/// Click rate per position: AOIs at p that received their trial's final
/// click over AOIs at p. rho is computed over populated positions 0..9.
PositionRates position_click_rates(const std::vector<TrialResult>& trials,
                                   PositionConvention convention, Flavor flavor);
PositionRates position_click_rates(const std::vector<TrialResult>& trials,
                                   PositionConvention convention);

/// Pearson correlation of average ranks. nullopt when lengths differ, are
/// below 3, or either rank vector has zero variance.
std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// Average (mid) ranks, 1-based.
std::vector<double> average_ranks(const std::vector<double>& v);

/// Nearest-rank percentile of an ascending-sorted sample: element at rank
/// ceil(p/100 * N), p = 0 maps to the first element.
double nearest_rank_percentile(const std::vector<double>& sorted, double p);

struct RegistrationParams {
  long window_ms = 1500;
  double threshold_px = 250.0;
};

/// Minimum distance from fixations whose midpoint falls in
/// [t_click - window, t_click] to the final click, plus the distance from the
/// fixation spanning t_click. Trials without a usable final click get
/// has_final_click = false.
RegistrationRecord gaze_cursor_registration(const std::vector<FixationEvent>& fixations,
                                            const std::vector<ClickEvent>& clicks,
                                            const RegistrationParams& params = {});

struct RegistrationStats {
  long n_trials = 0;
  long n_skipped = 0;   // no final click
  long n_excluded = 0;  // final click, no fixation in the window
  long n_included = 0;
  std::optional<double> median;
  std::optional<double> p25;
  std::optional<double> p75;
  std::optional<double> p95;
  long n_flagged = 0;
  std::optional<double> flagged_share;
  std::optional<double> concurrent_median;
  long n_concurrent = 0;
};

RegistrationStats aggregate_registration(const std::vector<RegistrationRecord>& records,
                                         double threshold_px = 250.0);

struct AdAudit {
  long n_classifications = 0;
  long n_disagreements = 0;
  long n_matched = 0;
  double iou_sum = 0.0;
  std::optional<double> mean_iou;
  long n_organic_overlapping_ads = 0;
};

/// Checks one trial's typed AOIs against its shipped rects.
AdAudit ad_consistency_audit(const std::vector<TypedAoi>& aois, const std::vector<AdRect>& rects,
                             double iou_threshold = 0.5);
AdAudit ad_consistency_audit(const std::vector<TrialResult>& trials, double iou_threshold = 0.5);

/// Lowercase tokens split on non-alphanumeric runs. Bytes >= 0x80 count as
/// alphanumeric so UTF-8 words stay whole.
std::vector<std::string> lexical_tokens(std::string_view text);

SnippetFeatures snippet_features(std::string_view snippet_text, std::string_view query_text);

}  // namespace allserp
