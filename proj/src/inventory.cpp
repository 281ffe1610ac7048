#include "allserp/inventory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace allserp {

InventoryTable etype_inventory(const std::vector<TrialResult>& trials, Flavor flavor) {
  InventoryTable table;
  table.n_trials = static_cast<long>(trials.size());
  std::map<Etype, InventoryRow> rows;

  for (const TrialResult& t : trials) {
    const FlavorResult& fr = t.flavor(flavor);
    std::set<Etype> above_fold_here;
    for (std::size_t i = 0; i < fr.aois.size(); ++i) {
      const Etype e = fr.aois[i].etype;
      const AoiStats& s = fr.stats[i];
      InventoryRow& row = rows[e];
      row.etype = e;
      ++row.n_aois;
      row.n_fixated += s.fixated;
      row.n_regressive += s.fixated && s.regressive;
      row.n_clicks += s.n_clicks;
      if (s.above_fold) above_fold_here.insert(e);
    }
    for (Etype e : above_fold_here) ++rows[e].n_trials_above_fold;
  }

  for (const auto& [e, row] : rows) table.total_clicks_attributed += row.n_clicks;
  for (auto& [e, row] : rows) {
    row.fixated_pct = row.n_aois ? 100.0 * row.n_fixated / row.n_aois : 0.0;
    row.click_pct = table.total_clicks_attributed
                        ? 100.0 * row.n_clicks / table.total_clicks_attributed
                        : 0.0;
    if (row.n_fixated > 0) row.regressive_pct = 100.0 * row.n_regressive / row.n_fixated;
    row.above_fold_pct = table.n_trials ? 100.0 * row.n_trials_above_fold / table.n_trials : 0.0;
    table.rows.push_back(row);
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const InventoryRow& l, const InventoryRow& r) { return l.n_aois > r.n_aois; });
  return table;
}

std::string_view to_string(PositionConvention c) {
  return c == PositionConvention::organic_only ? "organic_only" : "all_main_axis";
}

PositionRates position_click_rates(const std::vector<TrialResult>& trials,
                                   PositionConvention convention) {
  return position_click_rates(trials, convention,
                              convention == PositionConvention::organic_only
                                  ? Flavor::typed_gapfill
                                  : Flavor::organic_hybrid);
}

PositionRates position_click_rates(const std::vector<TrialResult>& trials,
                                   PositionConvention convention, Flavor flavor) {
  constexpr int kBuckets = 10;
  PositionRates out;
  out.convention = convention;
  out.flavor = flavor;
  out.buckets.resize(kBuckets + 1);
  for (int p = 0; p < kBuckets; ++p) out.buckets[p].label = std::to_string(p);
  out.buckets[kBuckets].label = "10+";

  for (const TrialResult& t : trials) {
    const FlavorResult& fr = t.flavor(flavor);
    const std::optional<std::string>& chosen = fr.status.aoi_id;

    std::vector<const TypedAoi*> ranked;
    for (const TypedAoi& a : fr.aois) {
      if (a.position < 0) continue;
      if (convention == PositionConvention::organic_only && a.etype != Etype::organic) continue;
      ranked.push_back(&a);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const TypedAoi* l, const TypedAoi* r) {
      return l->position < r->position;
    });
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const int pos = convention == PositionConvention::organic_only ? static_cast<int>(i)
                                                                      : ranked[i]->position;
      PositionBucket& b = out.buckets[std::min(pos, kBuckets)];
      ++b.n_aois;
      if (chosen && *chosen == ranked[i]->aoi_id) ++b.n_clicked;
    }
  }

  std::vector<double> xs, ys;
  for (int p = 0; p <= kBuckets; ++p) {
    PositionBucket& b = out.buckets[p];
    if (b.n_aois == 0) continue;
    b.click_rate = static_cast<double>(b.n_clicked) / b.n_aois;
    if (p < kBuckets) {
      out.total_aois_0_9 += b.n_aois;
      xs.push_back(p);
      ys.push_back(*b.click_rate);
    }
  }
  out.rho = spearman(xs, ys);
  return out;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return v[l] < v[r]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + j) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3) return std::nullopt;
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double nearest_rank_percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::nan("");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

RegistrationRecord gaze_cursor_registration(const std::vector<FixationEvent>& fixations,
                                            const std::vector<ClickEvent>& clicks,
                                            const RegistrationParams& params) {
  RegistrationRecord rec;
  const auto click = final_click(clicks);
  if (!click || !std::isfinite(click->x) || !std::isfinite(click->y)) return rec;
  rec.has_final_click = true;

  const double lo = static_cast<double>(click->t - params.window_ms);
  const double hi = static_cast<double>(click->t);
  std::optional<std::int64_t> concurrent_start;
  for (const FixationEvent& f : fixations) {
    const double d = std::hypot(f.x - click->x, f.y - click->y);
    const double mid = f.midpoint();
    if (mid >= lo && mid <= hi) {
      ++rec.n_in_window;
      if (!rec.min_lead_distance || d < *rec.min_lead_distance) rec.min_lead_distance = d;
    }
    if (f.start <= click->t && click->t <= f.end &&
        (!concurrent_start || f.start > *concurrent_start)) {
      concurrent_start = f.start;
      rec.concurrent_distance = d;
    }
  }
  return rec;
}

RegistrationStats aggregate_registration(const std::vector<RegistrationRecord>& records,
                                         double threshold_px) {
  RegistrationStats stats;
  stats.n_trials = static_cast<long>(records.size());
  std::vector<double> lead, concurrent;
  for (const RegistrationRecord& r : records) {
    if (!r.has_final_click) {
      ++stats.n_skipped;
      continue;
    }
    if (r.concurrent_distance) concurrent.push_back(*r.concurrent_distance);
    if (!r.min_lead_distance) {
      ++stats.n_excluded;
      continue;
    }
    ++stats.n_included;
    lead.push_back(*r.min_lead_distance);
    if (*r.min_lead_distance > threshold_px) ++stats.n_flagged;
  }
  if (!lead.empty()) {
    std::sort(lead.begin(), lead.end());
    stats.p25 = nearest_rank_percentile(lead, 25);
    stats.median = nearest_rank_percentile(lead, 50);
    stats.p75 = nearest_rank_percentile(lead, 75);
    stats.p95 = nearest_rank_percentile(lead, 95);
    stats.flagged_share = static_cast<double>(stats.n_flagged) / stats.n_included;
  }
  stats.n_concurrent = static_cast<long>(concurrent.size());
  if (!concurrent.empty()) {
    std::sort(concurrent.begin(), concurrent.end());
    stats.concurrent_median = nearest_rank_percentile(concurrent, 50);
  }
  return stats;
}

AdAudit ad_consistency_audit(const std::vector<TypedAoi>& aois, const std::vector<AdRect>& rects,
                             double iou_threshold) {
  AdAudit audit;
  for (const AdRect& r : rects) {
    ++audit.n_classifications;
    double best = 0.0;
    for (const TypedAoi& a : aois) {
      if (a.etype == r.etype) best = std::max(best, iou(a.box, r.box));
    }
    if (best >= iou_threshold) {
      ++audit.n_matched;
      audit.iou_sum += best;
    } else {
      ++audit.n_disagreements;
    }
  }
  for (const TypedAoi& a : aois) {
    if (a.etype != Etype::organic) continue;
    const bool hit = std::any_of(rects.begin(), rects.end(),
                                 [&](const AdRect& r) { return a.box.overlaps(r.box); });
    audit.n_organic_overlapping_ads += hit;
  }
  if (audit.n_matched) audit.mean_iou = audit.iou_sum / audit.n_matched;
  return audit;
}

AdAudit ad_consistency_audit(const std::vector<TrialResult>& trials, double iou_threshold) {
  AdAudit total;
  for (const TrialResult& t : trials) {
    const AdAudit a = ad_consistency_audit(t.typed.aois, t.ad_rects, iou_threshold);
    total.n_classifications += a.n_classifications;
    total.n_disagreements += a.n_disagreements;
    total.n_matched += a.n_matched;
    total.iou_sum += a.iou_sum;
    total.n_organic_overlapping_ads += a.n_organic_overlapping_ads;
  }
  if (total.n_matched) total.mean_iou = total.iou_sum / total.n_matched;
  return total;
}

std::vector<std::string> lexical_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      cur += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

SnippetFeatures snippet_features(std::string_view snippet_text, std::string_view query_text) {
  SnippetFeatures f;
  const auto snippet = lexical_tokens(snippet_text);
  const auto query = lexical_tokens(query_text);
  const std::set<std::string> distinct(snippet.begin(), snippet.end());
  if (!snippet.empty()) {
    f.type_token_ratio = static_cast<double>(distinct.size()) / static_cast<double>(snippet.size());
  }
  const std::set<std::string> qset(query.begin(), query.end());
  if (!qset.empty()) {
    long hits = 0;
    for (const auto& q : qset) hits += distinct.count(q);
    f.query_token_overlap = static_cast<double>(hits) / static_cast<double>(qset.size());
  }
  return f;
}

}  // namespace allserp
