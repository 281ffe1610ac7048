#pragma once

// Click attribution under X+Y containment, the trial-level main-axis click
// filter, and per-AOI fixation, regression and fold flags.

#include <optional>
#include <string>
#include <vector>

#include "allserp/core_model.hpp"

namespace allserp {

enum class AttributionMode { strict, tolerance, miss };
std::string_view to_string(AttributionMode m);

struct AttributionParams {
  int tolerance_x = 5;
  int tolerance_y = 10;
  // Clicks further than this outside the screenshot are pathological.
  int pathological_slack = 50;
};

struct PointAttribution {
  std::optional<std::size_t> aoi_index;  // into the AOI list passed in
  AttributionMode mode = AttributionMode::miss;
};

struct AttributionResult {
  ClickEvent click;
  std::optional<std::string> aoi_id;
  AttributionMode mode = AttributionMode::miss;
};

enum class ClickReason { attributed, dd_right, chrome_or_far, no_click };
std::string_view to_string(ClickReason r);

struct TrialClickStatus {
  bool main_axis = false;
  ClickReason reason = ClickReason::no_click;
  AttributionMode mode = AttributionMode::miss;
  std::optional<std::string> aoi_id;
};

/// Attributes a point against one trial's main-axis AOIs of one flavor.
/// Strict pass first; otherwise the boxes grown by the tolerance, nearest
/// unexpanded box wins, then lowest position. Off-axis AOIs in the list are
/// ignored. Throws PipelineError when main-axis AOIs overlap.
PointAttribution attribute_point(const std::vector<TypedAoi>& aois, double x, double y,
                                 const AttributionParams& params = {});

/// Squared distance from a point to a half-open box (0 inside).
double distance_to_box(const Box& b, double x, double y);

/// The is_final click, else the latest click by t. nullopt when no clicks.
std::optional<ClickEvent> final_click(const std::vector<ClickEvent>& clicks);

bool is_pathological(const ClickEvent& c, int screenshot_width, int screenshot_height,
                     const AttributionParams& params = {});

/// Trial filter: true iff the final click lands in a main-axis AOI.
TrialClickStatus is_main_axis_click(const std::vector<TypedAoi>& aois,
                                    const std::vector<ClickEvent>& clicks,
                                    const std::vector<AdRect>& ad_rects, int screenshot_width,
                                    int screenshot_height, const AttributionParams& params = {});

std::vector<AttributionResult> attribute_clicks(const std::vector<TypedAoi>& aois,
                                                const std::vector<ClickEvent>& clicks,
                                                int screenshot_width, int screenshot_height,
                                                const AttributionParams& params = {});

struct FixationAssignment {
  // Per fixation (input order): index of the strictly containing AOI.
  std::vector<std::optional<std::size_t>> per_fixation;
  // Per AOI: fixation indices ordered by start time.
  std::vector<std::vector<std::size_t>> per_aoi;
};

/// Strict point-in-box over all AOIs (no tolerance). When boxes overlap the
/// first containing AOI in list order wins.
FixationAssignment assign_fixations(const std::vector<TypedAoi>& aois,
                                    const std::vector<FixationEvent>& fixations);

/// AOI visit sequence in time order: per_fixation entries re-ordered by
/// fixation start, unassigned fixations removed.
std::vector<std::size_t> visit_sequence(const FixationAssignment& assignment,
                                        const std::vector<FixationEvent>& fixations);

/// Collapses consecutive repeats into visits; an AOI is regressive when it
/// has two or more visits (necessarily separated by another AOI's visit).
std::vector<bool> regression_flags(const std::vector<std::size_t>& aoi_sequence,
                                   std::size_t aoi_count);

/// An AOI is above the fold when it intersects y in [0, viewport_height).
std::vector<bool> above_fold(const std::vector<TypedAoi>& aois, const TrialMeta& meta);

}  // namespace allserp
