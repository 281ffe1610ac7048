// Command-line entry point. Exit codes: 0 success, 1 hard error,
// 2 completed with trial failures (ingest or pipeline errors).

#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "allserp/emit.hpp"
#include "allserp/pipeline.hpp"
#include "allserp/synth.hpp"

namespace fs = std::filesystem;
using namespace allserp;

namespace {

struct CorpusArgs {
  std::string input_dir;
  std::string out_dir;
  std::string flavor = "all";
  int jobs = 1;
  std::string rules;
  std::string config;
  std::uint64_t seed = 0;
  std::optional<double> activity_threshold;
  std::optional<int> min_gap_rows;
  std::optional<int> min_card_height;
  std::optional<int> composite_trigger;
  std::optional<int> min_split_rows;
};

void add_corpus_options(CLI::App* cmd, CorpusArgs& a) {
  cmd->add_option("--input-dir", a.input_dir, "Directory of per-trial bundles")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--out-dir", a.out_dir, "Output directory")->required();
  cmd->add_option("--flavor", a.flavor, "typed|typed_gapfill|organic_hybrid|all")
      ->check(CLI::IsMember({"typed", "typed_gapfill", "organic_hybrid", "all"}));
  cmd->add_option("--jobs", a.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--rules", a.rules, "Labeling rules file (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--config", a.config, "Config file (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "Accepted for symmetry; only synth uses it");
  cmd->add_option("--activity-threshold", a.activity_threshold, "Row activity threshold");
  cmd->add_option("--min-gap-rows", a.min_gap_rows, "Quiet rows that separate cards");
  cmd->add_option("--min-card-height", a.min_card_height, "Shortest kept span");
  cmd->add_option("--composite-trigger", a.composite_trigger, "Span height that triggers subdivision");
  cmd->add_option("--min-split-rows", a.min_split_rows, "Quiet rows that make a subdivision cut");
}

PipelineConfig resolve_config(const CorpusArgs& a) {
  PipelineConfig cfg;
  if (!a.config.empty()) apply_config_file(cfg, a.config);
  if (!a.rules.empty()) use_rules_file(cfg, a.rules);
  if (a.activity_threshold) cfg.segmentation.activity_threshold = *a.activity_threshold;
  if (a.min_gap_rows) cfg.segmentation.min_gap_rows = *a.min_gap_rows;
  if (a.min_card_height) cfg.segmentation.min_card_height = *a.min_card_height;
  if (a.composite_trigger) cfg.segmentation.composite_trigger_height = *a.composite_trigger;
  if (a.min_split_rows) cfg.segmentation.min_split_rows = *a.min_split_rows;
  return cfg;
}

std::vector<Flavor> flavors_of(const std::string& name) {
  if (name == "all") return {Flavor::typed, Flavor::typed_gapfill, Flavor::organic_hybrid};
  return {*flavor_from_string(name)};
}

int run(const CorpusArgs& a, EmitOptions opts) {
  const PipelineConfig cfg = resolve_config(a);
  const CorpusResult corpus = run_corpus(a.input_dir, cfg, a.jobs);
  for (const std::string& w : corpus.warnings) fmt::print(stderr, "warning: {}\n", w);
  opts.flavors = flavors_of(a.flavor);
  opts.input_dir = a.input_dir;
  emit_artifacts(a.out_dir, corpus, cfg, opts);
  for (const DroppedTrial& d : corpus.dropped) {
    fmt::print(stderr, "dropped {} ({}): {}\n", d.trial_dir, to_string(d.stage), d.detail);
  }
  fmt::print(stderr, "{} trial(s) processed, {} dropped\n", corpus.trials.size(),
             corpus.dropped.size());
  return corpus.n_failures() > 0 ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SERP AOI enrichment pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ALLSERP_VERSION);

  CorpusArgs build, audit, inventory, replay;
  CLI::App* build_cmd = app.add_subcommand("build-aois", "Run the full pipeline and emit every artifact");
  add_corpus_options(build_cmd, build);
  CLI::App* audit_cmd = app.add_subcommand("audit", "Ad consistency audit and gaze-cursor registration");
  add_corpus_options(audit_cmd, audit);
  CLI::App* inv_cmd = app.add_subcommand("inventory", "Per-etype inventory and position click rates");
  add_corpus_options(inv_cmd, inventory);
  CLI::App* replay_cmd = app.add_subcommand("replay-emit", "Per-trial JSON documents for the viewer");
  add_corpus_options(replay_cmd, replay);

  std::string synth_out;
  std::uint64_t synth_seed = 42;
  int synth_n = 10;
  double synth_noise = 0.0;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate synthetic trials with ground truth");
  synth_cmd->add_option("--out-dir", synth_out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_seed, "Corpus seed");
  synth_cmd->add_option("--n-trials", synth_n, "Number of trials")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--noise", synth_noise, "Gaussian pixel noise sigma")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build_cmd) return run(build, {});
    if (*audit_cmd) {
      EmitOptions o;
      o.corpus_csvs = o.trial_jsons = o.inventory = false;
      return run(audit, o);
    }
    if (*inv_cmd) {
      EmitOptions o;
      o.corpus_csvs = o.trial_jsons = o.audit = false;
      return run(inventory, o);
    }
    if (*replay_cmd) {
      EmitOptions o;
      o.corpus_csvs = o.inventory = o.audit = false;
      return run(replay, o);
    }
    if (*synth_cmd) {
      synth::write_corpus(synth_out, synth_seed, synth_n, synth_noise);
      fmt::print(stderr, "wrote {} trial(s) to {}\n", synth_n, synth_out);
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 1;
}
