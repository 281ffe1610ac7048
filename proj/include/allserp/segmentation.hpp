#pragma once

// Card-span extraction from the screenshot raster: main column detection,
// per-row standard-deviation row projection, run extraction, shipped-ad
// precedence and composite subdivision.

#include <vector>

#include "allserp/core_model.hpp"
#include "allserp/raster.hpp"

namespace allserp {

struct ColumnBounds {
  int x0 = 0;
  int x1 = 0;
  int width() const { return x1 - x0; }
  friend bool operator==(const ColumnBounds&, const ColumnBounds&) = default;
};

struct ActivityProfile {
  std::vector<double> values;  // one per raster row
  ColumnBounds column;
};

enum class SpanOrigin { cv, shipped_ad, subdivision };

struct CardSpan {
  int y0 = 0;
  int y1 = 0;
  SpanOrigin origin = SpanOrigin::cv;

  int height() const { return y1 - y0; }
  friend bool operator==(const CardSpan&, const CardSpan&) = default;
};

struct SegmentationParams {
  double activity_threshold = 2.0;
  int min_gap_rows = 8;
  int min_card_height = 24;
  int composite_trigger_height = 350;
  // Interior quiet runs at least this long are subdivision cut candidates.
  int min_split_rows = 4;
};

inline constexpr int kMinRasterWidth = 64;

/// Horizontal extent of the main results column. Throws PipelineError when
/// the raster is narrower than kMinRasterWidth.
ColumnBounds main_column_bounds(const GrayRaster& raster, const std::vector<AdRect>& ad_rects);

/// values[r] = population standard deviation of row r over [x0, x1).
ActivityProfile row_activity_profile(const GrayRaster& raster, ColumnBounds column);

/// Maximal active runs, merged across quiet gaps shorter than min_gap_rows,
/// with runs shorter than min_card_height dropped.
std::vector<CardSpan> card_spans(const ActivityProfile& profile, const SegmentationParams& params);

/// Inserts one shipped_ad span per dd_top/native_ad rect and trims CV spans
/// that overlap it. Throws PipelineError when two main-axis ad rects overlap
/// vertically.
std::vector<CardSpan> apply_ad_precedence(const std::vector<CardSpan>& spans,
                                          const std::vector<AdRect>& ad_rects,
                                          const SegmentationParams& params);

/// Splits a tall CV span at interior quiet runs. Children partition the
/// parent exactly.
std::vector<CardSpan> subdivide_composite(const CardSpan& span, const ActivityProfile& profile,
                                          const SegmentationParams& params);

struct SegmentationResult {
  ColumnBounds column;
  ActivityProfile profile;
  std::vector<CardSpan> spans;
};

/// Full raster-side pass: column, profile, spans, ad precedence, subdivision.
SegmentationResult segment_screenshot(const GrayRaster& raster,
                                      const std::vector<AdRect>& ad_rects,
                                      const SegmentationParams& params);

}  // namespace allserp
