#include "allserp/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <fmt/format.h>

namespace allserp {
namespace {

// Active x-runs closer than this are treated as one column.
constexpr int kColumnMergeGap = 16;

struct Interval {
  int a = 0;
  int b = 0;
};

std::vector<AdRect> main_axis_ads(const std::vector<AdRect>& ads) {
  std::vector<AdRect> out;
  for (const AdRect& r : ads) {
    if (r.etype == Etype::dd_top || r.etype == Etype::native_ad) out.push_back(r);
  }
  std::sort(out.begin(), out.end(),
            [](const AdRect& l, const AdRect& r) { return l.box.y < r.box.y; });
  return out;
}

}  // namespace

ColumnBounds main_column_bounds(const GrayRaster& raster, const std::vector<AdRect>& ad_rects) {
  if (raster.width < kMinRasterWidth || raster.height <= 0) {
    throw PipelineError(fmt::format("raster {}x{} too small for column detection (min width {})",
                                    raster.width, raster.height, kMinRasterWidth));
  }
  const int W = raster.width;
  const int H = raster.height;

  std::vector<std::uint64_t> sum(W, 0), sumsq(W, 0);
  for (int y = 0; y < H; ++y) {
    const auto row = raster.row(y);
    for (int x = 0; x < W; ++x) {
      const std::uint64_t v = row[x];
      sum[x] += v;
      sumsq[x] += v * v;
    }
  }
  std::vector<double> activity(W, 0.0);
  const double n = H;
  for (int x = 0; x < W; ++x) {
    const double mean = sum[x] / n;
    activity[x] = std::sqrt(std::max(0.0, sumsq[x] / n - mean * mean));
  }

  int rail_left = W;
  for (const AdRect& r : ad_rects) {
    if (r.etype != Etype::dd_right) continue;
    rail_left = std::min(rail_left, std::max(0, r.box.x));
    for (int x = std::max(0, r.box.x); x < std::min(W, r.box.x1()); ++x) activity[x] = 0.0;
  }

  const double peak = *std::max_element(activity.begin(), activity.end());
  ColumnBounds bounds{static_cast<int>(0.1 * W), static_cast<int>(0.72 * W)};

  if (peak > 0.0) {
    const double threshold = std::max(1.0, 0.1 * peak);
    std::vector<Interval> runs;
    for (int x = 0; x < W; ++x) {
      if (activity[x] < threshold) continue;
      if (!runs.empty() && x - runs.back().b < kColumnMergeGap) {
        runs.back().b = x + 1;
      } else {
        runs.push_back({x, x + 1});
      }
    }
    double best = -1.0;
    for (const Interval& run : runs) {
      double score = 0.0;
      for (int x = run.a; x < run.b; ++x) score += activity[x];
      if (score > best) {
        best = score;
        bounds = {run.a, run.b};
      }
    }
  }

  for (const AdRect& r : main_axis_ads(ad_rects)) {
    bounds.x0 = std::min(bounds.x0, std::max(0, r.box.x));
    bounds.x1 = std::max(bounds.x1, std::min(W, r.box.x1()));
  }
  if (rail_left < bounds.x1 && rail_left > bounds.x0) {
    bool cuts_ad = false;
    for (const AdRect& r : main_axis_ads(ad_rects)) cuts_ad |= r.box.x1() > rail_left;
    if (!cuts_ad) bounds.x1 = rail_left;
  }
  return bounds;
}

ActivityProfile row_activity_profile(const GrayRaster& raster, ColumnBounds column) {
  if (column.x0 < 0 || column.x1 > raster.width || column.x0 >= column.x1) {
    throw PipelineError(fmt::format("column [{},{}) outside raster width {}", column.x0,
                                    column.x1, raster.width));
  }
  ActivityProfile profile;
  profile.column = column;
  profile.values.resize(static_cast<std::size_t>(raster.height));
  const std::uint64_t n = static_cast<std::uint64_t>(column.width());
  for (int y = 0; y < raster.height; ++y) {
    const auto row = raster.row(y);
    std::uint64_t s = 0, ss = 0;
    for (int x = column.x0; x < column.x1; ++x) {
      const std::uint64_t v = row[x];
      s += v;
      ss += v * v;
    }
    // Exact integer variance numerator: n*ss - s^2 >= 0.
    const std::uint64_t num = n * ss - s * s;
    profile.values[y] = std::sqrt(static_cast<double>(num)) / static_cast<double>(n);
  }
  return profile;
}

std::vector<CardSpan> card_spans(const ActivityProfile& profile, const SegmentationParams& params) {
  std::vector<Interval> runs;
  const int H = static_cast<int>(profile.values.size());
  for (int y = 0; y < H; ++y) {
    if (!(profile.values[y] > params.activity_threshold)) continue;
    if (!runs.empty() && runs.back().b == y) {
      runs.back().b = y + 1;
    } else if (!runs.empty() && y - runs.back().b < params.min_gap_rows) {
      runs.back().b = y + 1;
    } else {
      runs.push_back({y, y + 1});
    }
  }
  std::vector<CardSpan> spans;
  for (const Interval& r : runs) {
    if (r.b - r.a >= params.min_card_height) spans.push_back({r.a, r.b, SpanOrigin::cv});
  }
  return spans;
}

std::vector<CardSpan> apply_ad_precedence(const std::vector<CardSpan>& spans,
                                          const std::vector<AdRect>& ad_rects,
                                          const SegmentationParams& params) {
  const std::vector<AdRect> ads = main_axis_ads(ad_rects);
  for (std::size_t i = 1; i < ads.size(); ++i) {
    if (ads[i].box.y < ads[i - 1].box.y1()) {
      throw PipelineError(fmt::format("main-axis ad rects overlap at y={} and y={}",
                                      ads[i - 1].box.y, ads[i].box.y));
    }
  }

  std::vector<CardSpan> out;
  for (const CardSpan& s : spans) {
    // Subtract every ad interval from the span; keep pieces that are tall enough.
    std::vector<Interval> pieces{{s.y0, s.y1}};
    for (const AdRect& ad : ads) {
      std::vector<Interval> next;
      for (const Interval& p : pieces) {
        const int a = ad.box.y;
        const int b = ad.box.y1();
        if (b <= p.a || a >= p.b) {
          next.push_back(p);
          continue;
        }
        if (a > p.a) next.push_back({p.a, a});
        if (b < p.b) next.push_back({b, p.b});
      }
      pieces = std::move(next);
    }
    for (const Interval& p : pieces) {
      const bool trimmed = p.a != s.y0 || p.b != s.y1;
      if (trimmed && p.b - p.a < params.min_card_height) continue;
      out.push_back({p.a, p.b, s.origin});
    }
  }
  for (const AdRect& ad : ads) out.push_back({ad.box.y, ad.box.y1(), SpanOrigin::shipped_ad});
  std::sort(out.begin(), out.end(),
            [](const CardSpan& l, const CardSpan& r) { return l.y0 < r.y0; });
  return out;
}

std::vector<CardSpan> subdivide_composite(const CardSpan& span, const ActivityProfile& profile,
                                          const SegmentationParams& params) {
  if (span.height() <= params.composite_trigger_height) return {span};

  std::vector<int> cuts;
  int y = span.y0 + 1;
  while (y < span.y1 - 1) {
    if (profile.values[y] > params.activity_threshold) {
      ++y;
      continue;
    }
    const int a = y;
    while (y < span.y1 && !(profile.values[y] > params.activity_threshold)) ++y;
    const int b = y;
    if (b < span.y1 && b - a >= params.min_split_rows) cuts.push_back((a + b) / 2);
  }

  std::vector<CardSpan> children;
  int last = span.y0;
  for (int cut : cuts) {
    if (cut - last >= params.min_card_height && span.y1 - cut >= params.min_card_height) {
      children.push_back({last, cut, SpanOrigin::subdivision});
      last = cut;
    }
  }
  if (children.empty()) return {span};
  children.push_back({last, span.y1, SpanOrigin::subdivision});
  return children;
}

SegmentationResult segment_screenshot(const GrayRaster& raster,
                                      const std::vector<AdRect>& ad_rects,
                                      const SegmentationParams& params) {
  SegmentationResult result;
  result.column = main_column_bounds(raster, ad_rects);
  result.profile = row_activity_profile(raster, result.column);
  const auto merged =
      apply_ad_precedence(card_spans(result.profile, params), ad_rects, params);
  for (const CardSpan& s : merged) {
    if (s.origin != SpanOrigin::cv) {
      result.spans.push_back(s);
      continue;
    }
    for (const CardSpan& child : subdivide_composite(s, result.profile, params)) {
      result.spans.push_back(child);
    }
  }
  return result;
}

}  // namespace allserp
