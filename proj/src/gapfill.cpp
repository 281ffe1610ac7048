#include "allserp/gapfill.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace allserp {

std::vector<TypedAoi> gapfill(const std::vector<TypedAoi>& aois) {
  std::vector<TypedAoi> out = aois;
  for (TypedAoi& a : out) a.flavor = Flavor::typed_gapfill;

  std::vector<std::size_t> main;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (is_main_axis(out[i].etype)) main.push_back(i);
  }
  std::stable_sort(main.begin(), main.end(), [&](std::size_t l, std::size_t r) {
    return out[l].box.y < out[r].box.y;
  });
  for (std::size_t k = 1; k < main.size(); ++k) {
    const Box& up = out[main[k - 1]].box;
    const Box& lo = out[main[k]].box;
    if (up.y1() > lo.y) {
      throw PipelineError(fmt::format("main-axis AOIs overlap: [{},{}) and [{},{})", up.y,
                                      up.y1(), lo.y, lo.y1()));
    }
  }

  // Decide every pair against the input geometry, then apply.
  struct Cut {
    std::size_t upper, lower;
    int mid;
  };
  std::vector<Cut> cuts;
  for (std::size_t k = 1; k < main.size(); ++k) {
    const TypedAoi& a = out[main[k - 1]];
    const TypedAoi& b = out[main[k]];
    if (a.etype != Etype::organic || b.etype != Etype::organic) continue;
    const int gap0 = a.box.y1();
    const int gap1 = b.box.y;
    if (gap1 <= gap0) continue;
    const int xa = std::min(a.box.x, b.box.x);
    const int xb = std::max(a.box.x1(), b.box.x1());
    bool blocked = false;
    for (std::size_t j = 0; j < out.size() && !blocked; ++j) {
      if (j == main[k - 1] || j == main[k]) continue;
      const Box& o = out[j].box;
      blocked = o.y < gap1 && gap0 < o.y1() && o.x < xb && xa < o.x1();
    }
    if (blocked) continue;
    cuts.push_back({main[k - 1], main[k], (gap0 + gap1) / 2});
  }
  for (const Cut& c : cuts) {
    Box& up = out[c.upper].box;
    Box& lo = out[c.lower].box;
    // A one-row gap goes entirely to the lower AOI.
    if (c.mid != up.y1()) out[c.upper].source = AoiSource::gapfill_extension;
    if (c.mid != lo.y) out[c.lower].source = AoiSource::gapfill_extension;
    up.h = c.mid - up.y;
    lo.h = lo.y1() - c.mid;
    lo.y = c.mid;
  }
  return out;
}

}  // namespace allserp
