#include "allserp/emit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <numeric>

#include "allserp/inventory.hpp"

namespace allserp {

using nlohmann::json;

namespace {

const char* b01(bool b) { return b ? "1" : "0"; }

std::string pct(double v) { return fmt::format("{:.3f}", v); }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::vector<std::size_t> row_order(const std::vector<TypedAoi>& aois) {
  std::vector<std::size_t> idx(aois.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
    const TypedAoi& a = aois[l];
    const TypedAoi& b = aois[r];
    if (a.position != b.position) return a.position < b.position;
    if (a.box.y != b.box.y) return a.box.y < b.box.y;
    return a.box.x < b.box.x;
  });
  return idx;
}

json flavor_json(const FlavorResult& fr) {
  json aois = json::array();
  for (std::size_t i : row_order(fr.aois)) {
    const TypedAoi& a = fr.aois[i];
    const AoiStats& s = fr.stats[i];
    aois.push_back({
        {"aoi_id", a.aoi_id},
        {"etype", to_string(a.etype)},
        {"position", a.position},
        {"x", a.box.x},
        {"y", a.box.y},
        {"w", a.box.w},
        {"h", a.box.h},
        {"source", to_string(a.source)},
        {"fixated", s.fixated},
        {"n_fixations", s.n_fixations},
        {"regressive", s.regressive},
        {"above_fold", s.above_fold},
        {"n_clicks_attributed", s.n_clicks},
    });
  }
  json clicks = json::array();
  for (const AttributionResult& r : fr.clicks) {
    clicks.push_back({
        {"t", r.click.t},
        {"x", r.click.x},
        {"y", r.click.y},
        {"is_final", r.click.is_final},
        {"aoi_id", opt(r.aoi_id)},
        {"mode", to_string(r.mode)},
    });
  }
  json fix = json::array();
  for (const auto& id : fr.fixation_aoi) fix.push_back(opt(id));
  return {
      {"aois", aois},
      {"clicks", clicks},
      {"fixation_aoi", fix},
      {"status",
       {{"main_axis", fr.status.main_axis},
        {"reason", to_string(fr.status.reason)},
        {"mode", to_string(fr.status.mode)},
        {"aoi_id", opt(fr.status.aoi_id)}}},
  };
}

std::string_view to_string(SpanOrigin o) {
  switch (o) {
    case SpanOrigin::cv: return "cv";
    case SpanOrigin::shipped_ad: return "shipped_ad";
    case SpanOrigin::subdivision: return "subdivision";
  }
  return "cv";
}

}  // namespace

std::string corpus_csv_name(Flavor flavor) {
  return fmt::format("aois_by_trial_id_{}.csv", to_string(flavor));
}

std::vector<csv::Row> corpus_csv_rows(const std::vector<TrialResult>& trials, Flavor flavor) {
  std::vector<const TrialResult*> order;
  for (const TrialResult& t : trials) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const TrialResult* l, const TrialResult* r) {
    return l->meta.trial_id < r->meta.trial_id;
  });
  std::vector<csv::Row> rows;
  for (const TrialResult* t : order) {
    const FlavorResult& fr = t->flavor(flavor);
    for (std::size_t i : row_order(fr.aois)) {
      const TypedAoi& a = fr.aois[i];
      const AoiStats& s = fr.stats[i];
      rows.push_back({t->meta.trial_id, a.aoi_id, std::string(to_string(a.etype)),
                      std::to_string(a.position), std::to_string(a.box.x),
                      std::to_string(a.box.y), std::to_string(a.box.w), std::to_string(a.box.h),
                      std::string(to_string(flavor)), std::string(to_string(a.source)),
                      b01(s.fixated), std::to_string(s.n_fixations), b01(s.regressive),
                      b01(s.above_fold), std::to_string(s.n_clicks)});
    }
  }
  return rows;
}

std::string corpus_csv(const std::vector<TrialResult>& trials, Flavor flavor) {
  std::string out(kCorpusCsvHeader);
  out += '\n';
  for (const csv::Row& r : corpus_csv_rows(trials, flavor)) out += csv::format_row(r);
  return out;
}

json provenance(const PipelineConfig& cfg) {
  return {
      {"tool", "allserp"},
      {"tool_version", ALLSERP_VERSION},
      {"config", config_to_json(cfg)},
  };
}

std::string trial_file_stem(std::string_view trial_id) {
  std::string out;
  for (char c : trial_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

json trial_json(const TrialResult& t, const PipelineConfig& cfg, const std::string& screenshot_ref) {
  json meta = {
      {"trial_id", t.meta.trial_id},
      {"viewport_width", t.meta.viewport_width},
      {"viewport_height", t.meta.viewport_height},
      {"screenshot_width", t.meta.screenshot_width},
      {"screenshot_height", t.meta.screenshot_height},
      {"query_text", t.meta.query_text},
      {"entry_timestamp", t.meta.entry_timestamp ? json(*t.meta.entry_timestamp) : json(nullptr)},
  };

  json spans = json::array();
  for (const CardSpan& s : t.spans) {
    spans.push_back({{"y0", s.y0}, {"y1", s.y1}, {"origin", to_string(s.origin)}});
  }
  json labels = json::array();
  for (const EtypeLabel& l : t.labels) {
    labels.push_back({{"doc_index", l.doc_index},
                      {"etype", to_string(l.etype)},
                      {"tier", l.tier},
                      {"ad_candidate", l.ad_candidate}});
  }
  json tiers = json::object();
  for (const auto& [tier, n] : t.tier_counts) tiers[std::to_string(tier)] = n;
  json vwarn = json::array();
  for (const Violation& v : t.validation_warnings) {
    vwarn.push_back({{"code", v.code}, {"detail", v.detail}});
  }

  std::vector<std::size_t> fix_order(t.fixations.size());
  std::iota(fix_order.begin(), fix_order.end(), 0);
  std::stable_sort(fix_order.begin(), fix_order.end(), [&](std::size_t l, std::size_t r) {
    return t.fixations[l].start < t.fixations[r].start;
  });
  json fixations = json::array();
  for (std::size_t i : fix_order) {
    const FixationEvent& f = t.fixations[i];
    fixations.push_back({{"index", i},
                         {"x", f.x},
                         {"y", f.y},
                         {"start", f.start},
                         {"end", f.end},
                         {"duration", f.duration()}});
  }
  json cursor = json::array();
  for (const CursorEvent& c : t.cursor) {
    cursor.push_back({{"t", c.t}, {"x", c.x}, {"y", c.y}, {"kind", to_string(c.kind)}});
  }
  json clicks = json::array();
  for (const ClickEvent& c : t.clicks) {
    clicks.push_back({{"t", c.t}, {"x", c.x}, {"y", c.y}, {"is_final", c.is_final}});
  }

  const TrialClickStatus& st = t.typed_gapfill.status;
  const RegistrationRecord& reg = t.registration;
  return {
      {"schema_version", 1},
      {"meta", meta},
      {"flavors",
       {{"typed", flavor_json(t.typed)},
        {"typed_gapfill", flavor_json(t.typed_gapfill)},
        {"organic_hybrid", flavor_json(t.organic_hybrid)}}},
      {"flags",
       {{"main_axis_click", st.main_axis},
        {"click_reason", to_string(st.reason)},
        {"click_mode", to_string(st.mode)},
        {"click_aoi_id", opt(st.aoi_id)}}},
      {"registration",
       {{"has_final_click", reg.has_final_click},
        {"n_in_window", reg.n_in_window},
        {"min_lead_distance", opt(reg.min_lead_distance)},
        {"concurrent_distance", opt(reg.concurrent_distance)}}},
      {"diagnostics",
       {{"column", {{"x0", t.column.x0}, {"x1", t.column.x1}}},
        {"spans", spans},
        {"labels", labels},
        {"tier_counts", tiers},
        {"warnings", t.warnings},
        {"validation_warnings", vwarn}}},
      {"replay",
       {{"screenshot", screenshot_ref},
        {"fixations", fixations},
        {"cursor", cursor},
        {"clicks", clicks}}},
      {"provenance", provenance(cfg)},
  };
}

std::string inventory_csv(const InventoryTable& table) {
  std::string out = csv::format_row({"etype", "n_aois", "fixated_pct", "n_clicks", "click_pct",
                                     "regressive_pct", "above_fold_pct", "n_fixated",
                                     "n_regressive", "n_trials_above_fold"});
  for (const InventoryRow& r : table.rows) {
    out += csv::format_row({std::string(to_string(r.etype)), std::to_string(r.n_aois),
                            pct(r.fixated_pct), std::to_string(r.n_clicks), pct(r.click_pct),
                            r.regressive_pct ? pct(*r.regressive_pct) : "",
                            pct(r.above_fold_pct), std::to_string(r.n_fixated),
                            std::to_string(r.n_regressive), std::to_string(r.n_trials_above_fold)});
  }
  return out;
}

json inventory_json(const InventoryTable& table, Flavor flavor, const PipelineConfig& cfg) {
  json rows = json::array();
  for (const InventoryRow& r : table.rows) {
    rows.push_back({
        {"etype", to_string(r.etype)},
        {"n_aois", r.n_aois},
        {"fixated_pct", r.fixated_pct},
        {"n_clicks", r.n_clicks},
        {"click_pct", r.click_pct},
        {"regressive_pct", opt(r.regressive_pct)},
        {"above_fold_pct", r.above_fold_pct},
        {"n_fixated", r.n_fixated},
        {"n_regressive", r.n_regressive},
        {"n_trials_above_fold", r.n_trials_above_fold},
    });
  }
  return {
      {"provenance", provenance(cfg)},
      {"flavor", to_string(flavor)},
      {"n_trials", table.n_trials},
      // Every AOI-attributed click event, intermediate clicks included.
      {"total_clicks_attributed", table.total_clicks_attributed},
      {"rows", rows},
  };
}

json position_rates_json(const std::vector<TrialResult>& trials, const PipelineConfig& cfg) {
  json conventions = json::array();
  for (PositionConvention c : {PositionConvention::organic_only, PositionConvention::all_main_axis}) {
    const PositionRates pr = position_click_rates(trials, c);
    json buckets = json::array();
    for (const PositionBucket& b : pr.buckets) {
      buckets.push_back({{"position", b.label},
                         {"n_aois", b.n_aois},
                         {"n_clicked", b.n_clicked},
                         {"click_rate", opt(b.click_rate)}});
    }
    conventions.push_back({{"convention", to_string(c)},
                           {"flavor", to_string(pr.flavor)},
                           {"buckets", buckets},
                           {"total_aois_0_9", pr.total_aois_0_9},
                           {"spearman_rho", opt(pr.rho)}});
  }
  return {{"provenance", provenance(cfg)}, {"conventions", conventions}};
}

json ad_consistency_json(const std::vector<TrialResult>& trials, const PipelineConfig& cfg) {
  const AdAudit total = ad_consistency_audit(trials, cfg.ad_iou_threshold);
  json per_trial = json::array();
  for (const TrialResult& t : trials) {
    const AdAudit a = ad_consistency_audit(t.typed.aois, t.ad_rects, cfg.ad_iou_threshold);
    if (a.n_classifications == 0 && a.n_organic_overlapping_ads == 0) continue;
    per_trial.push_back({{"trial_id", t.meta.trial_id},
                         {"n_classifications", a.n_classifications},
                         {"n_disagreements", a.n_disagreements},
                         {"mean_iou", opt(a.mean_iou)},
                         {"n_organic_overlapping_ads", a.n_organic_overlapping_ads}});
  }
  return {
      {"provenance", provenance(cfg)},
      {"n_trials", trials.size()},
      {"n_classifications", total.n_classifications},
      {"n_disagreements", total.n_disagreements},
      {"n_matched", total.n_matched},
      {"mean_iou", opt(total.mean_iou)},
      {"n_organic_overlapping_ads", total.n_organic_overlapping_ads},
      {"trials", per_trial},
  };
}

json registration_json(const std::vector<TrialResult>& trials, const PipelineConfig& cfg) {
  std::vector<RegistrationRecord> records;
  json per_trial = json::array();
  for (const TrialResult& t : trials) {
    const RegistrationRecord& r = t.registration;
    records.push_back(r);
    per_trial.push_back({
        {"trial_id", t.meta.trial_id},
        {"has_final_click", r.has_final_click},
        {"n_in_window", r.n_in_window},
        {"min_lead_distance", opt(r.min_lead_distance)},
        {"concurrent_distance", opt(r.concurrent_distance)},
        {"flagged", r.min_lead_distance.has_value() &&
                        *r.min_lead_distance > cfg.registration.threshold_px},
    });
  }
  const RegistrationStats s = aggregate_registration(records, cfg.registration.threshold_px);
  return {
      {"provenance", provenance(cfg)},
      {"percentile_method", "nearest_rank"},
      {"aggregate",
       {{"n_trials", s.n_trials},
        {"n_included", s.n_included},
        {"n_excluded", s.n_excluded},
        {"n_skipped", s.n_skipped},
        {"median", opt(s.median)},
        {"p25", opt(s.p25)},
        {"p75", opt(s.p75)},
        {"p95", opt(s.p95)},
        {"threshold_px", cfg.registration.threshold_px},
        {"n_flagged", s.n_flagged},
        {"flagged_share", opt(s.flagged_share)},
        {"n_concurrent", s.n_concurrent},
        {"concurrent_median", opt(s.concurrent_median)}}},
      {"trials", per_trial},
  };
}

std::string dropped_trials_csv(const std::vector<DroppedTrial>& dropped) {
  std::string out = csv::format_row({"trial_dir", "trial_id", "stage", "codes", "detail"});
  for (const DroppedTrial& d : dropped) {
    std::string codes;
    for (const std::string& c : d.codes) codes += (codes.empty() ? "" : ";") + c;
    out += csv::format_row({d.trial_dir, d.trial_id, std::string(to_string(d.stage)), codes, d.detail});
  }
  return out;
}

std::string trial_flags_csv(const std::vector<TrialResult>& trials) {
  std::string out =
      csv::format_row({"trial_id", "main_axis_click", "reason", "mode", "aoi_id"});
  for (const TrialResult& t : trials) {
    const TrialClickStatus& s = t.typed_gapfill.status;
    out += csv::format_row({t.meta.trial_id, b01(s.main_axis), std::string(to_string(s.reason)),
                            std::string(to_string(s.mode)), s.aoi_id.value_or("")});
  }
  return out;
}

std::string content_features_csv(const std::vector<TrialResult>& trials) {
  std::string out = csv::format_row(
      {"trial_id", "aoi_id", "position", "etype", "type_token_ratio", "query_token_overlap"});
  for (const TrialResult& t : trials) {
    for (const ContentFeatureRow& r : t.content_features) {
      out += csv::format_row({t.meta.trial_id, r.aoi_id, std::to_string(r.position),
                              std::string(to_string(r.etype)),
                              fmt::format("{:.6f}", r.features.type_token_ratio),
                              fmt::format("{:.6f}", r.features.query_token_overlap)});
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

void emit_artifacts(const std::filesystem::path& out_dir, const CorpusResult& corpus,
                    const PipelineConfig& cfg, const EmitOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_json_file(out_dir / "provenance.json", provenance(cfg));
  write_text_file(out_dir / "dropped_trials.csv", dropped_trials_csv(corpus.dropped));

  if (options.corpus_csvs) {
    for (Flavor f : options.flavors) {
      write_text_file(out_dir / corpus_csv_name(f), corpus_csv(corpus.trials, f));
    }
    write_text_file(out_dir / "trial_flags.csv", trial_flags_csv(corpus.trials));
    write_text_file(out_dir / "content_features.csv", content_features_csv(corpus.trials));
  }
  if (options.trial_jsons) {
    const fs::path dir = out_dir / "trials";
    fs::create_directories(dir);
    for (const TrialResult& t : corpus.trials) {
      std::string ref;
      if (!options.input_dir.empty() && !t.trial_dir.empty()) {
        const fs::path shot = fs::absolute(options.input_dir / t.trial_dir / "screenshot.png");
        ref = fs::relative(shot, fs::absolute(dir)).generic_string();
        if (ref.empty()) ref = shot.generic_string();
      }
      write_json_file(dir / (trial_file_stem(t.meta.trial_id) + ".json"), trial_json(t, cfg, ref));
    }
  }
  if (options.inventory) {
    const InventoryTable inv = etype_inventory(corpus.trials, Flavor::typed_gapfill);
    write_text_file(out_dir / "inventory.csv", inventory_csv(inv));
    write_json_file(out_dir / "inventory.json", inventory_json(inv, Flavor::typed_gapfill, cfg));
    write_json_file(out_dir / "position_click_rates.json", position_rates_json(corpus.trials, cfg));
  }
  if (options.audit) {
    write_json_file(out_dir / "ad_consistency.json", ad_consistency_json(corpus.trials, cfg));
    write_json_file(out_dir / "gaze_cursor_coverage.json", registration_json(corpus.trials, cfg));
  }
}

}  // namespace allserp
