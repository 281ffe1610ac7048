#include "allserp/binder.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace allserp {
namespace {

AoiSource source_of(SpanOrigin o) {
  switch (o) {
    case SpanOrigin::cv: return AoiSource::cv_span;
    case SpanOrigin::shipped_ad: return AoiSource::shipped_ad;
    case SpanOrigin::subdivision: return AoiSource::subdivision;
  }
  return AoiSource::cv_span;
}

}  // namespace

BindResult bind_labels(const std::vector<CardSpan>& spans, const std::vector<EtypeLabel>& labels,
                       ColumnBounds column) {
  std::vector<EtypeLabel> stream;
  for (const EtypeLabel& l : labels) {
    if (l.etype != Etype::dd_right) stream.push_back(l);
  }

  BindResult result;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const CardSpan& s = spans[i];
    TypedAoi aoi;
    aoi.box = {column.x0, s.y0, column.width(), s.height()};
    aoi.source = source_of(s.origin);
    aoi.flavor = Flavor::typed;
    if (i < stream.size()) {
      aoi.etype = stream[i].etype;
      aoi.doc_index = stream[i].doc_index;
    } else {
      aoi.etype = Etype::unknown_widget;
    }
    result.aois.push_back(aoi);
  }
  if (spans.size() > stream.size()) {
    result.warnings.push_back(fmt::format("{} excess span(s) typed unknown_widget ({} spans, {} labels)",
                                          spans.size() - stream.size(), spans.size(),
                                          stream.size()));
  } else if (stream.size() > spans.size()) {
    result.warnings.push_back(fmt::format("{} excess label(s) dropped ({} spans, {} labels)",
                                          stream.size() - spans.size(), spans.size(),
                                          stream.size()));
  }
  return result;
}

std::vector<TypedAoi> propagate_ad_identity(const std::vector<TypedAoi>& aois,
                                            const std::vector<AdRect>& ad_rects,
                                            double iou_threshold) {
  std::vector<TypedAoi> out = aois;
  std::vector<bool> rect_used(ad_rects.size(), false);

  for (TypedAoi& aoi : out) {
    std::ptrdiff_t match = -1;
    for (std::size_t r = 0; r < ad_rects.size(); ++r) {
      const AdRect& rect = ad_rects[r];
      if (!is_main_axis(rect.etype)) continue;
      if (iou(aoi.box, rect.box) < iou_threshold) continue;
      if (match >= 0) {
        throw PipelineError(fmt::format("AOI at y={} matches two ad rects (y={} and y={})",
                                        aoi.box.y, ad_rects[match].box.y, rect.box.y));
      }
      match = static_cast<std::ptrdiff_t>(r);
    }
    if (match < 0) continue;
    aoi.etype = ad_rects[match].etype;
    aoi.box = ad_rects[match].box;
    aoi.source = AoiSource::shipped_ad;
    rect_used[match] = true;
  }

  for (std::size_t r = 0; r < ad_rects.size(); ++r) {
    const AdRect& rect = ad_rects[r];
    if (rect.etype == Etype::dd_right || !rect_used[r]) {
      TypedAoi aoi;
      aoi.etype = rect.etype;
      aoi.box = rect.box;
      aoi.source = AoiSource::shipped_ad;
      aoi.flavor = Flavor::typed;
      aoi.position = -1;
      out.push_back(aoi);
    }
  }
  return out;
}

std::vector<TypedAoi> assign_positions(const std::vector<TypedAoi>& aois) {
  std::vector<TypedAoi> out = aois;
  std::vector<TypedAoi*> main;
  for (TypedAoi& a : out) {
    if (is_main_axis(a.etype)) {
      main.push_back(&a);
    } else {
      a.position = -1;
    }
  }
  std::stable_sort(main.begin(), main.end(), [](const TypedAoi* l, const TypedAoi* r) {
    if (l->box.y != r->box.y) return l->box.y < r->box.y;
    return l->box.x < r->box.x;
  });
  for (std::size_t i = 0; i < main.size(); ++i) main[i]->position = static_cast<int>(i);

  std::stable_sort(out.begin(), out.end(), [](const TypedAoi& l, const TypedAoi& r) {
    if (l.position != r.position) return l.position < r.position;
    if (l.box.y != r.box.y) return l.box.y < r.box.y;
    return l.box.x < r.box.x;
  });
  return out;
}

void assign_aoi_ids(std::vector<TypedAoi>& aois, const std::string& trial_id) {
  for (std::size_t i = 0; i < aois.size(); ++i) {
    aois[i].aoi_id = fmt::format("{}#{:02d}", trial_id, i);
  }
}

}  // namespace allserp
