#pragma once

// Shared domain types for the SERP enrichment pipeline.
//
// Geometry lives in screenshot pixel space: origin top-left, y grows down.
// Boxes are half-open, covering [x, x+w) x [y, y+h).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "allserp/raster.hpp"

namespace allserp {

/// Thrown when a trial's raw inputs cannot be read at all (as opposed to
/// inputs that read fine but violate an invariant).
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by pipeline phases on corrupt input that breaks a precondition.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Box {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int x1() const { return x + w; }
  int y1() const { return y + h; }
  long long area() const { return static_cast<long long>(w) * h; }
  bool contains(double px, double py) const {
    return px >= x && px < x1() && py >= y && py < y1();
  }
  bool overlaps_y(const Box& o) const { return y < o.y1() && o.y < y1(); }
  bool overlaps(const Box& o) const {
    return x < o.x1() && o.x < x1() && overlaps_y(o);
  }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Intersection over union; 0 when the union is empty.
double iou(const Box& a, const Box& b);

enum class Etype {
  organic,
  dd_top,
  native_ad,
  dd_right,
  top_places,
  knowledge_panel,
  paa,
  image_pack,
  top_stories,
  other_widget,
  unknown_widget,
  chrome,
  related_searches,
};

inline constexpr Etype kAllEtypes[] = {
    Etype::organic,        Etype::dd_top,         Etype::native_ad,
    Etype::dd_right,       Etype::top_places,     Etype::knowledge_panel,
    Etype::paa,            Etype::image_pack,     Etype::top_stories,
    Etype::other_widget,   Etype::unknown_widget, Etype::chrome,
    Etype::related_searches,
};

std::string_view to_string(Etype e);
std::optional<Etype> etype_from_string(std::string_view s);

/// Main-axis etypes are numbered 0..N down the results column; the right
/// rail and footer-ish surfaces are off-axis.
constexpr bool is_main_axis(Etype e) {
  return e != Etype::dd_right && e != Etype::chrome &&
         e != Etype::related_searches;
}

constexpr bool is_ad(Etype e) {
  return e == Etype::dd_top || e == Etype::native_ad || e == Etype::dd_right;
}

enum class Flavor { typed, typed_gapfill, organic_hybrid };
std::string_view to_string(Flavor f);
std::optional<Flavor> flavor_from_string(std::string_view s);

enum class AoiSource { cv_span, shipped_ad, subdivision, gapfill_extension };
std::string_view to_string(AoiSource s);

struct TrialMeta {
  std::string trial_id;
  int viewport_width = 0;
  int viewport_height = 0;
  int screenshot_width = 0;
  int screenshot_height = 0;
  std::string query_text;
  std::optional<std::int64_t> entry_timestamp;
};

struct FixationEvent {
  double x = 0;
  double y = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;

  std::int64_t duration() const { return end - start; }
  double midpoint() const { return (static_cast<double>(start) + end) / 2.0; }
};

struct ClickEvent {
  std::int64_t t = 0;
  double x = 0;
  double y = 0;
  bool is_final = false;
};

enum class CursorKind { move, click, scroll };
std::string_view to_string(CursorKind k);
std::optional<CursorKind> cursor_kind_from_string(std::string_view s);

struct CursorEvent {
  std::int64_t t = 0;
  double x = 0;
  double y = 0;
  CursorKind kind = CursorKind::move;
};

struct AdRect {
  Etype etype = Etype::dd_top;
  Box box;
};

struct TrialBundle {
  std::optional<TrialMeta> meta;
  GrayRaster screenshot;
  std::string html;
  std::vector<AdRect> ad_rects;
  std::vector<FixationEvent> fixations;
  std::vector<ClickEvent> clicks;
  std::vector<CursorEvent> cursor;
};

struct TypedAoi {
  std::string aoi_id;
  Etype etype = Etype::unknown_widget;
  Box box;
  int position = -1;
  Flavor flavor = Flavor::typed;
  AoiSource source = AoiSource::cv_span;
  // Index of the HTML card this AOI was bound to, -1 when none.
  int doc_index = -1;

  friend bool operator==(const TypedAoi&, const TypedAoi&) = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Severity { fatal, warning };

struct Violation {
  std::string code;
  Severity severity = Severity::fatal;
  std::string detail;
};

using ValidationReport = std::vector<Violation>;

/// Checks every bundle invariant and lists the failures. Empty means valid.
/// Codes are stable strings (trial_dropped, ad_rect_out_of_bounds, ...).
/// Pathological click coordinates are reported as warnings, not fatal: such
/// trials still flow through and are flagged no_click downstream.
ValidationReport validate_trial_bundle(const TrialBundle& bundle);

bool has_fatal(const ValidationReport& report);

}  // namespace allserp
