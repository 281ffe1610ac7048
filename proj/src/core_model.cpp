#include "allserp/core_model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace allserp {

std::string_view to_string(Etype e) {
  switch (e) {
    case Etype::organic: return "organic";
    case Etype::dd_top: return "dd_top";
    case Etype::native_ad: return "native_ad";
    case Etype::dd_right: return "dd_right";
    case Etype::top_places: return "top_places";
    case Etype::knowledge_panel: return "knowledge_panel";
    case Etype::paa: return "paa";
    case Etype::image_pack: return "image_pack";
    case Etype::top_stories: return "top_stories";
    case Etype::other_widget: return "other_widget";
    case Etype::unknown_widget: return "unknown_widget";
    case Etype::chrome: return "chrome";
    case Etype::related_searches: return "related_searches";
  }
  return "unknown_widget";
}

std::optional<Etype> etype_from_string(std::string_view s) {
  for (Etype e : kAllEtypes) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

std::string_view to_string(Flavor f) {
  switch (f) {
    case Flavor::typed: return "typed";
    case Flavor::typed_gapfill: return "typed_gapfill";
    case Flavor::organic_hybrid: return "organic_hybrid";
  }
  return "typed";
}

std::optional<Flavor> flavor_from_string(std::string_view s) {
  for (Flavor f : {Flavor::typed, Flavor::typed_gapfill, Flavor::organic_hybrid}) {
    if (to_string(f) == s) return f;
  }
  return std::nullopt;
}

std::string_view to_string(AoiSource s) {
  switch (s) {
    case AoiSource::cv_span: return "cv_span";
    case AoiSource::shipped_ad: return "shipped_ad";
    case AoiSource::subdivision: return "subdivision";
    case AoiSource::gapfill_extension: return "gapfill_extension";
  }
  return "cv_span";
}

std::string_view to_string(CursorKind k) {
  switch (k) {
    case CursorKind::move: return "move";
    case CursorKind::click: return "click";
    case CursorKind::scroll: return "scroll";
  }
  return "move";
}

std::optional<CursorKind> cursor_kind_from_string(std::string_view s) {
  for (CursorKind k : {CursorKind::move, CursorKind::click, CursorKind::scroll}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

double iou(const Box& a, const Box& b) {
  const long long ix = std::max(0, std::min(a.x1(), b.x1()) - std::max(a.x, b.x));
  const long long iy = std::max(0, std::min(a.y1(), b.y1()) - std::max(a.y, b.y));
  const long long inter = ix * iy;
  const long long uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

ValidationReport validate_trial_bundle(const TrialBundle& b) {
  ValidationReport report;
  auto fail = [&](std::string code, std::string detail, Severity sev = Severity::fatal) {
    report.push_back({std::move(code), sev, std::move(detail)});
  };

  if (!b.meta) {
    fail("trial_dropped", "missing meta");
  } else if (b.fixations.empty()) {
    fail("trial_dropped", "no fixations");
  }

  if (b.meta) {
    const TrialMeta& m = *b.meta;
    if (m.trial_id.empty()) fail("empty_trial_id", "trial_id is empty");
    if (m.viewport_width <= 0 || m.viewport_height <= 0) {
      fail("viewport_invalid", fmt::format("viewport {}x{}", m.viewport_width, m.viewport_height));
    }
    if (m.viewport_width > m.screenshot_width || m.viewport_height > m.screenshot_height) {
      fail("viewport_exceeds_screenshot",
           fmt::format("viewport {}x{} vs screenshot {}x{}", m.viewport_width,
                       m.viewport_height, m.screenshot_width, m.screenshot_height));
    }
    if (b.screenshot.width != m.screenshot_width || b.screenshot.height != m.screenshot_height) {
      fail("raster_size_mismatch",
           fmt::format("raster {}x{} vs meta {}x{}", b.screenshot.width, b.screenshot.height,
                       m.screenshot_width, m.screenshot_height));
    }
  }

  const int sw = b.screenshot.width;
  const int sh = b.screenshot.height;
  for (std::size_t i = 0; i < b.ad_rects.size(); ++i) {
    const Box& r = b.ad_rects[i].box;
    if (r.w <= 0 || r.h <= 0) {
      fail("ad_rect_degenerate", fmt::format("ad rect {} has size {}x{}", i, r.w, r.h));
    } else if (r.x < 0 || r.y < 0 || r.x1() > sw || r.y1() > sh) {
      fail("ad_rect_out_of_bounds",
           fmt::format("ad rect {} [{},{} {}x{}] outside {}x{}", i, r.x, r.y, r.w, r.h, sw, sh));
    }
    if (!is_ad(b.ad_rects[i].etype)) {
      fail("ad_rect_bad_etype", fmt::format("ad rect {} has non-ad etype", i));
    }
  }

  for (std::size_t i = 0; i < b.fixations.size(); ++i) {
    const FixationEvent& f = b.fixations[i];
    if (!std::isfinite(f.x) || !std::isfinite(f.y)) {
      fail("fixation_non_finite", fmt::format("fixation {}", i));
    }
    if (f.end < f.start) fail("fixation_end_before_start", fmt::format("fixation {}", i));
  }

  const auto finals = std::count_if(b.clicks.begin(), b.clicks.end(),
                                    [](const ClickEvent& c) { return c.is_final; });
  if (finals > 1) fail("multiple_final_clicks", fmt::format("{} final clicks", finals));
  for (std::size_t i = 0; i < b.clicks.size(); ++i) {
    if (!std::isfinite(b.clicks[i].x) || !std::isfinite(b.clicks[i].y)) {
      fail("click_non_finite", fmt::format("click {}", i), Severity::warning);
    }
  }

  for (std::size_t i = 1; i < b.cursor.size(); ++i) {
    if (b.cursor[i].t < b.cursor[i - 1].t) {
      fail("cursor_time_decreasing", fmt::format("cursor event {}", i), Severity::warning);
      break;
    }
  }
  return report;
}

bool has_fatal(const ValidationReport& report) {
  return std::any_of(report.begin(), report.end(),
                     [](const Violation& v) { return v.severity == Severity::fatal; });
}

}  // namespace allserp
