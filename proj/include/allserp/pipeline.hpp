#pragma once

// Per-trial orchestration (segment, label, bind, gap-fill, pool, attribute)
// and the corpus runner.

#include <filesystem>
#include <string>
#include <vector>

#include "allserp/config.hpp"
#include "allserp/core_model.hpp"
#include "allserp/trial_result.hpp"

namespace allserp {

/// Hybrid flavor from the typed flavor: main-axis non-ad etypes become
/// organic, off-axis AOIs are dropped, positions are kept.
std::vector<TypedAoi> pool_to_hybrid(const std::vector<TypedAoi>& typed);

/// Fixation, regression, fold and click outcomes of one flavor.
FlavorResult evaluate_flavor(Flavor flavor, std::vector<TypedAoi> aois, const TrialBundle& bundle,
                             const PipelineConfig& cfg);

/// Runs every phase on a bundle that passed validation. Throws PipelineError
/// (or IngestError) on corrupt input.
TrialResult process_trial(const TrialBundle& bundle, const PipelineConfig& cfg);

enum class DropStage { validation, ingest, pipeline };
std::string_view to_string(DropStage s);

struct DroppedTrial {
  std::string trial_dir;  // directory name under the input root
  std::string trial_id;   // empty when meta was unreadable
  DropStage stage = DropStage::validation;
  std::vector<std::string> codes;
  std::string detail;
};

struct CorpusResult {
  std::vector<TrialResult> trials;    // ascending trial_id
  std::vector<DroppedTrial> dropped;  // ascending trial_dir
  std::vector<std::string> warnings;

  /// Trials that failed to ingest or crashed a phase. Validation drops are
  /// data filtering, not failures.
  long n_failures() const;
};

/// Every immediate subdirectory of input_dir is one trial. Throws
/// std::runtime_error when input_dir cannot be listed. Output is identical
/// for every jobs value.
CorpusResult run_corpus(const std::filesystem::path& input_dir, const PipelineConfig& cfg,
                        int jobs = 1);

}  // namespace allserp
