#include "allserp/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace allserp {

std::string_view to_string(AttributionMode m) {
  switch (m) {
    case AttributionMode::strict: return "strict";
    case AttributionMode::tolerance: return "tolerance";
    case AttributionMode::miss: return "miss";
  }
  return "miss";
}

std::string_view to_string(ClickReason r) {
  switch (r) {
    case ClickReason::attributed: return "attributed";
    case ClickReason::dd_right: return "dd_right";
    case ClickReason::chrome_or_far: return "chrome_or_far";
    case ClickReason::no_click: return "no_click";
  }
  return "no_click";
}

double distance_to_box(const Box& b, double x, double y) {
  const double dx = std::max({static_cast<double>(b.x) - x, x - b.x1(), 0.0});
  const double dy = std::max({static_cast<double>(b.y) - y, y - b.y1(), 0.0});
  return dx * dx + dy * dy;
}

namespace {

bool in_expanded(const Box& b, double x, double y, const AttributionParams& p) {
  return x >= b.x - p.tolerance_x && x < b.x1() + p.tolerance_x && y >= b.y - p.tolerance_y &&
         y < b.y1() + p.tolerance_y;
}

void check_disjoint(const std::vector<TypedAoi>& aois) {
  std::vector<const TypedAoi*> main;
  for (const TypedAoi& a : aois) {
    if (is_main_axis(a.etype)) main.push_back(&a);
  }
  for (std::size_t i = 0; i < main.size(); ++i) {
    for (std::size_t j = i + 1; j < main.size(); ++j) {
      if (main[i]->box.overlaps(main[j]->box)) {
        throw PipelineError(fmt::format("main-axis AOIs {} and {} overlap", main[i]->aoi_id,
                                        main[j]->aoi_id));
      }
    }
  }
}

}  // namespace

PointAttribution attribute_point(const std::vector<TypedAoi>& aois, double x, double y,
                                 const AttributionParams& params) {
  check_disjoint(aois);
  PointAttribution out;
  if (!std::isfinite(x) || !std::isfinite(y)) return out;

  for (std::size_t i = 0; i < aois.size(); ++i) {
    if (is_main_axis(aois[i].etype) && aois[i].box.contains(x, y)) {
      out.aoi_index = i;
      out.mode = AttributionMode::strict;
      return out;
    }
  }
  double best_d = 0;
  for (std::size_t i = 0; i < aois.size(); ++i) {
    const TypedAoi& a = aois[i];
    if (!is_main_axis(a.etype) || !in_expanded(a.box, x, y, params)) continue;
    const double d = distance_to_box(a.box, x, y);
    if (!out.aoi_index || d < best_d ||
        (d == best_d && a.position < aois[*out.aoi_index].position)) {
      out.aoi_index = i;
      best_d = d;
    }
  }
  if (out.aoi_index) out.mode = AttributionMode::tolerance;
  return out;
}

std::optional<ClickEvent> final_click(const std::vector<ClickEvent>& clicks) {
  if (clicks.empty()) return std::nullopt;
  for (const ClickEvent& c : clicks) {
    if (c.is_final) return c;
  }
  const ClickEvent* latest = &clicks.front();
  for (const ClickEvent& c : clicks) {
    if (c.t >= latest->t) latest = &c;
  }
  return *latest;
}

bool is_pathological(const ClickEvent& c, int screenshot_width, int screenshot_height,
                     const AttributionParams& params) {
  if (!std::isfinite(c.x) || !std::isfinite(c.y)) return true;
  if (c.x < 0 || c.y < 0) return true;
  return c.x > screenshot_width + params.pathological_slack ||
         c.y > screenshot_height + params.pathological_slack;
}

TrialClickStatus is_main_axis_click(const std::vector<TypedAoi>& aois,
                                    const std::vector<ClickEvent>& clicks,
                                    const std::vector<AdRect>& ad_rects, int screenshot_width,
                                    int screenshot_height, const AttributionParams& params) {
  TrialClickStatus status;
  const auto click = final_click(clicks);
  if (!click || is_pathological(*click, screenshot_width, screenshot_height, params)) {
    status.reason = ClickReason::no_click;
    return status;
  }
  const PointAttribution hit = attribute_point(aois, click->x, click->y, params);
  if (hit.aoi_index) {
    status.main_axis = true;
    status.reason = ClickReason::attributed;
    status.mode = hit.mode;
    status.aoi_id = aois[*hit.aoi_index].aoi_id;
    return status;
  }
  for (const AdRect& r : ad_rects) {
    if (r.etype == Etype::dd_right && in_expanded(r.box, click->x, click->y, params)) {
      status.reason = ClickReason::dd_right;
      return status;
    }
  }
  status.reason = ClickReason::chrome_or_far;
  return status;
}

std::vector<AttributionResult> attribute_clicks(const std::vector<TypedAoi>& aois,
                                                const std::vector<ClickEvent>& clicks,
                                                int screenshot_width, int screenshot_height,
                                                const AttributionParams& params) {
  std::vector<AttributionResult> out;
  out.reserve(clicks.size());
  for (const ClickEvent& c : clicks) {
    AttributionResult r;
    r.click = c;
    if (!is_pathological(c, screenshot_width, screenshot_height, params)) {
      const PointAttribution hit = attribute_point(aois, c.x, c.y, params);
      if (hit.aoi_index) {
        r.aoi_id = aois[*hit.aoi_index].aoi_id;
        r.mode = hit.mode;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

FixationAssignment assign_fixations(const std::vector<TypedAoi>& aois,
                                    const std::vector<FixationEvent>& fixations) {
  FixationAssignment out;
  out.per_fixation.resize(fixations.size());
  out.per_aoi.resize(aois.size());
  for (std::size_t f = 0; f < fixations.size(); ++f) {
    const FixationEvent& fx = fixations[f];
    if (!std::isfinite(fx.x) || !std::isfinite(fx.y)) continue;
    for (std::size_t a = 0; a < aois.size(); ++a) {
      if (aois[a].box.contains(fx.x, fx.y)) {
        out.per_fixation[f] = a;
        out.per_aoi[a].push_back(f);
        break;
      }
    }
  }
  for (auto& list : out.per_aoi) {
    std::stable_sort(list.begin(), list.end(), [&](std::size_t l, std::size_t r) {
      return fixations[l].start < fixations[r].start;
    });
  }
  return out;
}

std::vector<std::size_t> visit_sequence(const FixationAssignment& assignment,
                                        const std::vector<FixationEvent>& fixations) {
  std::vector<std::size_t> order(fixations.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return fixations[l].start < fixations[r].start;
  });
  std::vector<std::size_t> seq;
  for (std::size_t f : order) {
    if (assignment.per_fixation[f]) seq.push_back(*assignment.per_fixation[f]);
  }
  return seq;
}

std::vector<bool> regression_flags(const std::vector<std::size_t>& aoi_sequence,
                                   std::size_t aoi_count) {
  std::vector<int> visits(aoi_count, 0);
  for (std::size_t i = 0; i < aoi_sequence.size(); ++i) {
    if (i > 0 && aoi_sequence[i] == aoi_sequence[i - 1]) continue;
    if (aoi_sequence[i] < aoi_count) ++visits[aoi_sequence[i]];
  }
  std::vector<bool> flags(aoi_count);
  for (std::size_t a = 0; a < aoi_count; ++a) flags[a] = visits[a] >= 2;
  return flags;
}

std::vector<bool> above_fold(const std::vector<TypedAoi>& aois, const TrialMeta& meta) {
  std::vector<bool> out(aois.size());
  for (std::size_t i = 0; i < aois.size(); ++i) {
    const Box& b = aois[i].box;
    out[i] = b.h > 0 && b.y < meta.viewport_height && b.y1() > 0;
  }
  return out;
}

}  // namespace allserp
