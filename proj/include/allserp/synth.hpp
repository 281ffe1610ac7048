#pragma once

// Deterministic synthetic trials with exact ground truth.
//
// Page model: 1280 px wide, background 240, main column x in [160, 700),
// right rail x in [760, 1180). Text is simulated as bands of random dark
// pixels. Every bundle byte is a function of (spec, seed, noise) alone.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "allserp/attribution.hpp"
#include "allserp/core_model.hpp"
#include "allserp/trial_result.hpp"
#include "json.hpp"

namespace allserp::synth {

inline constexpr int kPageWidth = 1280;
inline constexpr int kColumnX0 = 160;
inline constexpr int kColumnX1 = 700;
inline constexpr int kRailX0 = 760;
inline constexpr int kRailX1 = 1180;
inline constexpr std::uint8_t kBackground = 240;
inline constexpr std::uint8_t kInk = 30;

/// Integer-only mapping from the engine so draws do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform in [lo, hi].
  int uniform(int lo, int hi);
  /// Uniform in [0, 1).
  double unit();
  bool chance(double p) { return unit() < p; }
  /// Standard normal (Box-Muller).
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// Per-trial seed derived from a corpus seed and the trial index.
std::uint64_t trial_seed(std::uint64_t corpus_seed, std::uint64_t index);

/// One planted card in the main column. A card with more than one segment is
/// a composite: segments are separated by the quiet bands in `bands`
/// (bands.size() == segments.size() - 1) and each segment is its own AOI.
struct CardPlan {
  Etype etype = Etype::organic;
  int y = 0;
  std::vector<int> segments{120};
  std::vector<int> bands;
  // knowledge_panel only: signal through data-attrid instead of a class.
  bool via_attrid = false;

  int height() const;
};

struct RailAd {
  int y = 0;
  int h = 0;
};

enum class ClickTarget { main_axis, tolerance, dd_right, chrome, far, none, pathological };
std::string_view to_string(ClickTarget t);

struct ClickPlan {
  ClickTarget target = ClickTarget::main_axis;
  // Index into LayoutSpec::cards for main_axis / tolerance / chrome targets;
  // for composites the first segment is used.
  int card = -1;
  int n_intermediate = 0;
  // When false no click carries is_final and the latest click is final.
  bool flag_final = true;
};

struct LayoutSpec {
  std::string trial_id = "synth-0000";
  std::string query_text = "alpha beta";
  int viewport_width = 1280;
  int viewport_height = 900;
  int min_page_height = 0;
  std::vector<CardPlan> cards;  // top to bottom, non-overlapping
  std::optional<RailAd> rail;
  int n_fixations = 20;
  ClickPlan click;
};

/// Random layout with realistic etype mix, composites, rail ads and chrome.
LayoutSpec random_layout(Rng& rng, const std::string& trial_id);

/// Exact answers for one generated trial.
struct GroundTruth {
  std::string trial_id;
  std::vector<Etype> doc_labels;          // document order, dd_right included
  std::vector<TypedAoi> typed;            // pipeline order, ids assigned
  std::vector<TypedAoi> typed_gapfill;    // same order as typed
  std::vector<AoiStats> gapfill_stats;    // parallel to typed_gapfill
  std::vector<std::optional<std::string>> fixation_aoi;  // gap-fill flavor
  std::vector<std::optional<std::string>> click_aoi;     // gap-fill flavor
  TrialClickStatus status;                                // gap-fill flavor
};

struct GeneratedTrial {
  TrialBundle bundle;
  GroundTruth truth;
};

/// Renders spec. noise_sigma adds clamped Gaussian pixel noise. Throws
/// std::invalid_argument when planted cards overlap or leave the page.
GeneratedTrial generate_trial(const LayoutSpec& spec, Rng& rng, double noise_sigma = 0.0);
GeneratedTrial generate_trial(const LayoutSpec& spec, std::uint64_t seed,
                              double noise_sigma = 0.0);

/// random_layout then generate_trial on one generator.
GeneratedTrial generate_random_trial(std::uint64_t seed, const std::string& trial_id,
                                     double noise_sigma = 0.0);

nlohmann::json ground_truth_json(const GroundTruth& truth);

/// Writes n trials as <out_dir>/<trial_id>/ with ground_truth.json inside.
/// Trial ids are synth-0000, synth-0001, ...
void write_corpus(const std::filesystem::path& out_dir, std::uint64_t seed, int n_trials,
                  double noise_sigma = 0.0);

}  // namespace allserp::synth
