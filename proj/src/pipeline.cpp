#include "allserp/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "allserp/binder.hpp"
#include "allserp/gapfill.hpp"
#include "allserp/ingest.hpp"
#include "allserp/inventory.hpp"

namespace allserp {

std::vector<TypedAoi> pool_to_hybrid(const std::vector<TypedAoi>& typed) {
  std::vector<TypedAoi> out;
  for (TypedAoi a : typed) {
    if (!is_main_axis(a.etype)) continue;
    if (a.etype != Etype::dd_top && a.etype != Etype::native_ad) a.etype = Etype::organic;
    a.flavor = Flavor::organic_hybrid;
    out.push_back(std::move(a));
  }
  return out;
}

FlavorResult evaluate_flavor(Flavor flavor, std::vector<TypedAoi> aois, const TrialBundle& bundle,
                             const PipelineConfig& cfg) {
  const TrialMeta& meta = *bundle.meta;
  FlavorResult fr;
  fr.flavor = flavor;
  for (TypedAoi& a : aois) a.flavor = flavor;
  fr.aois = std::move(aois);

  fr.clicks = attribute_clicks(fr.aois, bundle.clicks, meta.screenshot_width,
                               meta.screenshot_height, cfg.attribution);
  fr.status = is_main_axis_click(fr.aois, bundle.clicks, bundle.ad_rects, meta.screenshot_width,
                                 meta.screenshot_height, cfg.attribution);

  const FixationAssignment fa = assign_fixations(fr.aois, bundle.fixations);
  const std::vector<bool> regressive =
      regression_flags(visit_sequence(fa, bundle.fixations), fr.aois.size());
  const std::vector<bool> fold = above_fold(fr.aois, meta);

  std::map<std::string, int> clicks_per_id;
  for (const AttributionResult& r : fr.clicks) {
    if (r.aoi_id) ++clicks_per_id[*r.aoi_id];
  }

  fr.stats.resize(fr.aois.size());
  for (std::size_t i = 0; i < fr.aois.size(); ++i) {
    AoiStats& s = fr.stats[i];
    s.n_fixations = static_cast<int>(fa.per_aoi[i].size());
    s.fixated = s.n_fixations > 0;
    s.regressive = regressive[i];
    s.above_fold = fold[i];
    const auto it = clicks_per_id.find(fr.aois[i].aoi_id);
    s.n_clicks = it == clicks_per_id.end() ? 0 : it->second;
  }
  fr.fixation_aoi.reserve(bundle.fixations.size());
  for (const auto& idx : fa.per_fixation) {
    fr.fixation_aoi.push_back(idx ? std::optional<std::string>(fr.aois[*idx].aoi_id)
                                  : std::nullopt);
  }
  return fr;
}

TrialResult process_trial(const TrialBundle& bundle, const PipelineConfig& cfg) {
  if (!bundle.meta) throw PipelineError("process_trial: bundle has no meta");
  const TrialMeta& meta = *bundle.meta;
  TrialResult tr;
  tr.meta = meta;
  tr.ad_rects = bundle.ad_rects;
  tr.fixations = bundle.fixations;
  tr.clicks = bundle.clicks;
  tr.cursor = bundle.cursor;
  for (const Violation& v : validate_trial_bundle(bundle)) {
    if (v.severity == Severity::warning) tr.validation_warnings.push_back(v);
  }

  SegmentationResult seg = segment_screenshot(bundle.screenshot, bundle.ad_rects, cfg.segmentation);
  tr.column = seg.column;
  tr.spans = seg.spans;

  const std::vector<DocCard> cards = parse_doc_cards(bundle.html, cfg.rules);
  tr.labels = label_sequence(cards, cfg.rules);
  for (const EtypeLabel& l : tr.labels) ++tr.tier_counts[l.tier];

  BindResult bound = bind_labels(tr.spans, tr.labels, tr.column);
  tr.warnings = std::move(bound.warnings);
  std::vector<TypedAoi> typed =
      assign_positions(propagate_ad_identity(bound.aois, bundle.ad_rects, cfg.ad_iou_threshold));
  assign_aoi_ids(typed, meta.trial_id);

  std::vector<TypedAoi> filled = gapfill(typed);
  std::vector<TypedAoi> hybrid = pool_to_hybrid(typed);

  tr.typed = evaluate_flavor(Flavor::typed, typed, bundle, cfg);
  tr.typed_gapfill = evaluate_flavor(Flavor::typed_gapfill, std::move(filled), bundle, cfg);
  tr.organic_hybrid = evaluate_flavor(Flavor::organic_hybrid, std::move(hybrid), bundle, cfg);

  // Pathological final clicks carry no usable position for the probe.
  const auto fc = final_click(bundle.clicks);
  if (fc && !is_pathological(*fc, meta.screenshot_width, meta.screenshot_height, cfg.attribution)) {
    tr.registration = gaze_cursor_registration(bundle.fixations, bundle.clicks, cfg.registration);
  }

  for (const TypedAoi& a : tr.typed_gapfill.aois) {
    if (a.position < 0 || a.doc_index < 0 || a.doc_index >= static_cast<int>(cards.size())) continue;
    tr.content_features.push_back(
        {a.aoi_id, a.position, a.etype,
         snippet_features(cards[static_cast<std::size_t>(a.doc_index)].snippet_text,
                          meta.query_text)});
  }
  return tr;
}

std::string_view to_string(DropStage s) {
  switch (s) {
    case DropStage::validation: return "validation";
    case DropStage::ingest: return "ingest";
    case DropStage::pipeline: return "pipeline";
  }
  return "validation";
}

long CorpusResult::n_failures() const {
  return std::count_if(dropped.begin(), dropped.end(),
                       [](const DroppedTrial& d) { return d.stage != DropStage::validation; });
}

namespace {

struct Slot {
  std::optional<TrialResult> result;
  std::optional<DroppedTrial> dropped;
};

Slot run_one(const std::filesystem::path& dir, const PipelineConfig& cfg) {
  Slot slot;
  DroppedTrial d;
  d.trial_dir = dir.filename().string();
  TrialBundle bundle;
  try {
    bundle = load_trial_bundle(dir);
  } catch (const std::exception& e) {
    d.stage = DropStage::ingest;
    d.codes = {"ingest_error"};
    d.detail = e.what();
    slot.dropped = std::move(d);
    return slot;
  }
  if (bundle.meta) d.trial_id = bundle.meta->trial_id;

  const ValidationReport report = validate_trial_bundle(bundle);
  if (has_fatal(report)) {
    d.stage = DropStage::validation;
    for (const Violation& v : report) {
      if (v.severity != Severity::fatal) continue;
      d.codes.push_back(v.code);
      if (!v.detail.empty()) d.detail += (d.detail.empty() ? "" : "; ") + v.detail;
    }
    slot.dropped = std::move(d);
    return slot;
  }
  try {
    slot.result = process_trial(bundle, cfg);
    slot.result->trial_dir = d.trial_dir;
  } catch (const std::exception& e) {
    d.stage = DropStage::pipeline;
    d.codes = {"pipeline_error"};
    d.detail = e.what();
    slot.dropped = std::move(d);
  }
  return slot;
}

}  // namespace

CorpusResult run_corpus(const std::filesystem::path& input_dir, const PipelineConfig& cfg,
                        int jobs) {
  namespace fs = std::filesystem;
  std::vector<fs::path> dirs;
  std::error_code ec;
  fs::directory_iterator it(input_dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot read input dir {}: {}", input_dir.string(), ec.message()));
  for (const auto& entry : it) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());

  CorpusResult out;
  if (dirs.empty()) {
    out.warnings.push_back(fmt::format("no trial directories under {}", input_dir.string()));
    return out;
  }

  std::vector<Slot> slots(dirs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < dirs.size(); i = next++) slots[i] = run_one(dirs[i], cfg);
  };
  const int n_threads = std::clamp(jobs, 1, static_cast<int>(dirs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  // Sort barrier: everything below runs in directory order.
  std::map<std::string, std::string> seen;  // trial_id -> first dir
  for (std::size_t i = 0; i < slots.size(); ++i) {
    Slot& s = slots[i];
    if (s.dropped) {
      out.dropped.push_back(std::move(*s.dropped));
      continue;
    }
    const std::string& id = s.result->meta.trial_id;
    const std::string dir = dirs[i].filename().string();
    if (auto [pos, fresh] = seen.emplace(id, dir); !fresh) {
      out.dropped.push_back({dir, id, DropStage::validation, {"duplicate_trial_id"},
                             fmt::format("trial_id also used by {}", pos->second)});
      continue;
    }
    out.trials.push_back(std::move(*s.result));
  }
  std::sort(out.trials.begin(), out.trials.end(), [](const TrialResult& l, const TrialResult& r) {
    return l.meta.trial_id < r.meta.trial_id;
  });
  return out;
}

}  // namespace allserp
