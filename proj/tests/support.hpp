#pragma once

// Shared fixtures and independent brute-force oracles for the test binaries.
// Oracles here never call the code they check.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "allserp/core_model.hpp"

namespace allserp::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("allserp_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Every regular file under root keyed by relative path.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[std::filesystem::relative(e.path(), root).generic_string()] = slurp(e.path());
    }
  }
  return out;
}

inline TypedAoi aoi(Etype e, int y0, int y1, int x0 = 160, int x1 = 700, std::string id = "") {
  TypedAoi a;
  a.etype = e;
  a.box = {x0, y0, x1 - x0, y1 - y0};
  a.aoi_id = std::move(id);
  return a;
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Two-pass population standard deviation.
inline double oracle_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

/// Rank by counting: rank(x) = #{v < x} + (#{v == x} + 1) / 2.
inline std::vector<double> oracle_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline std::optional<double> oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx) / std::sqrt(syy);
}

inline std::optional<double> oracle_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) return std::nullopt;
  return oracle_pearson(oracle_ranks(x), oracle_ranks(y));
}

/// Nearest rank by definition: the smallest sample value v such that at
/// least p percent of the sample is <= v.
inline double oracle_percentile(const std::vector<double>& sample, double p) {
  std::vector<double> s = sample;
  std::sort(s.begin(), s.end());
  for (double v : s) {
    const auto at_or_below = std::count_if(s.begin(), s.end(), [&](double w) { return w <= v; });
    if (static_cast<double>(at_or_below) * 100.0 >= p * static_cast<double>(s.size())) return v;
  }
  return s.back();
}

/// Regressive: some visit, then a visit elsewhere, then a return.
inline bool oracle_reenters(const std::vector<int>& seq, int aoi) {
  bool seen = false, left = false;
  for (int v : seq) {
    if (v == aoi && seen && left) return true;
    if (v == aoi) seen = true;
    if (v != aoi && seen) left = true;
  }
  return false;
}

/// Attribution by exhaustive scan over main-axis AOIs: all strict hits, else
/// all expanded hits ranked by (distance to box, position).
inline std::optional<std::size_t> oracle_attribute(const std::vector<TypedAoi>& aois, double x,
                                                   double y, int tx = 5, int ty = 10) {
  std::vector<std::size_t> strict;
  for (std::size_t i = 0; i < aois.size(); ++i) {
    const Box& b = aois[i].box;
    if (is_main_axis(aois[i].etype) && x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h) {
      strict.push_back(i);
    }
  }
  if (!strict.empty()) return strict.front();
  struct Cand {
    double d;
    int pos;
    std::size_t i;
  };
  std::vector<Cand> c;
  for (std::size_t i = 0; i < aois.size(); ++i) {
    const Box& b = aois[i].box;
    if (!is_main_axis(aois[i].etype)) continue;
    if (x >= b.x - tx && x < b.x + b.w + tx && y >= b.y - ty && y < b.y + b.h + ty) {
      const double dx = x < b.x ? b.x - x : (x >= b.x + b.w ? x - (b.x + b.w) : 0.0);
      const double dy = y < b.y ? b.y - y : (y >= b.y + b.h ? y - (b.y + b.h) : 0.0);
      c.push_back({std::hypot(dx, dy), aois[i].position, i});
    }
  }
  if (c.empty()) return std::nullopt;
  std::sort(c.begin(), c.end(), [](const Cand& a, const Cand& b) {
    if (a.d != b.d) return a.d < b.d;
    return a.pos < b.pos;
  });
  return c.front().i;
}

/// Gap-fill by row ownership: each row of a gap between adjacent organics
/// goes to the upper AOI below the floor midpoint and to the lower AOI from
/// it on; boxes are rebuilt from owned rows.
inline std::vector<TypedAoi> oracle_gapfill(const std::vector<TypedAoi>& in) {
  std::vector<TypedAoi> out = in;
  std::vector<std::size_t> main;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (is_main_axis(in[i].etype)) main.push_back(i);
  }
  std::sort(main.begin(), main.end(), [&](auto l, auto r) { return in[l].box.y < in[r].box.y; });
  std::vector<int> top(in.size()), bottom(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    top[i] = in[i].box.y;
    bottom[i] = in[i].box.y + in[i].box.h;
  }
  for (std::size_t k = 0; k + 1 < main.size(); ++k) {
    const TypedAoi& a = in[main[k]];
    const TypedAoi& b = in[main[k + 1]];
    if (a.etype != Etype::organic || b.etype != Etype::organic) continue;
    const int g0 = a.box.y + a.box.h, g1 = b.box.y;
    if (g1 <= g0) continue;
    bool blocked = false;
    for (std::size_t j = 0; j < in.size(); ++j) {
      if (j == main[k] || j == main[k + 1]) continue;
      const Box& o = in[j].box;
      const bool x_overlap = o.x < std::max(a.box.x + a.box.w, b.box.x + b.box.w) &&
                             std::min(a.box.x, b.box.x) < o.x + o.w;
      for (int row = g0; row < g1 && !blocked; ++row) {
        blocked = x_overlap && row >= o.y && row < o.y + o.h;
      }
    }
    if (blocked) continue;
    for (int row = g0; row < g1; ++row) {
      // 2*row < g0 + g1 - (g0 + g1) % 2  <=>  row < floor((g0 + g1) / 2)
      if (2 * row < g0 + g1 - ((g0 + g1) % 2)) {
        bottom[main[k]] = row + 1;
      } else {
        top[main[k + 1]] = std::min(top[main[k + 1]], row);
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].box.y = top[i];
    out[i].box.h = bottom[i] - top[i];
    out[i].flavor = Flavor::typed_gapfill;
    if (out[i].box != in[i].box) out[i].source = AoiSource::gapfill_extension;
  }
  return out;
}

/// Random results column: main-axis cards with 0..60 px gaps, mostly
/// organic, plus an optional rail ad and an optional chrome card that may
/// block a gap. Input order is shuffled.
template <class Gen>
std::vector<TypedAoi> random_column_layout(Gen& gen) {
  static constexpr Etype kMain[] = {Etype::organic,   Etype::organic,    Etype::organic,
                                    Etype::organic,   Etype::dd_top,     Etype::native_ad,
                                    Etype::paa,       Etype::image_pack, Etype::top_stories,
                                    Etype::other_widget};
  std::vector<TypedAoi> out;
  int y = static_cast<int>(gen() % 80);
  const int n = 1 + static_cast<int>(gen() % 12);
  for (int i = 0; i < n; ++i) {
    const int h = 1 + static_cast<int>(gen() % 200);
    out.push_back(aoi(kMain[gen() % std::size(kMain)], y, y + h));
    y += h + static_cast<int>(gen() % 61);
  }
  if (gen() % 2) out.push_back(aoi(Etype::dd_right, 50, 400, 760, 1180));
  if (gen() % 3 == 0) {
    const int a = static_cast<int>(gen() % static_cast<unsigned>(y + 1));
    out.push_back(aoi(Etype::chrome, a, a + 1 + static_cast<int>(gen() % 40)));
  }
  std::shuffle(out.begin(), out.end(), gen);
  return out;
}

struct OracleRegistration {
  long skipped = 0, excluded = 0, flagged = 0;
  std::vector<double> lead;  // ascending
};

/// Registration recount from raw streams: final click (flag, else latest),
/// pathological clicks skipped, fixation midpoints in [t - window, t].
template <class Trials>
OracleRegistration oracle_registration(const Trials& trials, double window_ms = 1500,
                                       double threshold = 250, double slack = 50) {
  OracleRegistration o;
  for (const auto& t : trials) {
    const ClickEvent* fin = nullptr;
    for (const auto& c : t.clicks) {
      if (c.is_final) fin = &c;
    }
    if (!fin) {
      for (const auto& c : t.clicks) {
        if (!fin || c.t >= fin->t) fin = &c;
      }
    }
    if (!fin || !std::isfinite(fin->x) || !std::isfinite(fin->y) || fin->x < 0 || fin->y < 0 ||
        fin->x > t.meta.screenshot_width + slack || fin->y > t.meta.screenshot_height + slack) {
      ++o.skipped;
      continue;
    }
    std::optional<double> best;
    for (const auto& f : t.fixations) {
      const double mid = (static_cast<double>(f.start) + static_cast<double>(f.end)) / 2.0;
      if (mid < static_cast<double>(fin->t) - window_ms || mid > static_cast<double>(fin->t)) continue;
      // Same distance primitive as production so "exact" means bitwise.
      const double d = std::hypot(f.x - fin->x, f.y - fin->y);
      if (!best || d < *best) best = d;
    }
    if (!best) {
      ++o.excluded;
      continue;
    }
    o.lead.push_back(*best);
    o.flagged += *best > threshold;
  }
  std::sort(o.lead.begin(), o.lead.end());
  return o;
}

}  // namespace allserp::testing
