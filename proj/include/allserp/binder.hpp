#pragma once

#include <string>
#include <vector>

#include "allserp/core_model.hpp"
#include "allserp/labeler.hpp"
#include "allserp/segmentation.hpp"

namespace allserp {

struct BindResult {
  std::vector<TypedAoi> aois;
  std::vector<std::string> warnings;
};

/// Pairs card spans (top to bottom) with labels (document order). dd_right
/// ad candidates are taken out of the stream first; they are placed from
/// shipped rects instead. Chrome and related-searches labels stay in the
/// stream because those cards render in the main column; they bind to their
/// span and end up off-axis. Excess spans become unknown_widget, excess labels
/// are dropped, and both are reported as warnings.
BindResult bind_labels(const std::vector<CardSpan>& spans, const std::vector<EtypeLabel>& labels,
                       ColumnBounds column);

/// Copies etype and geometry from main-axis ad rects onto AOIs they overlap
/// at IoU >= threshold, inserts unmatched main-axis rects, and appends
/// dd_right rects as off-axis AOIs. Throws PipelineError when one AOI matches
/// two rects.
std::vector<TypedAoi> propagate_ad_identity(const std::vector<TypedAoi>& aois,
                                            const std::vector<AdRect>& ad_rects,
                                            double iou_threshold = 0.5);

/// Main-axis AOIs get 0..K-1 by increasing y0; off-axis AOIs get -1.
/// Output is ordered by (position, y0, x) with off-axis AOIs first.
std::vector<TypedAoi> assign_positions(const std::vector<TypedAoi>& aois);

/// Gives every AOI the id "<trial_id>#<ordinal>" in the current order.
void assign_aoi_ids(std::vector<TypedAoi>& aois, const std::string& trial_id);

}  // namespace allserp
