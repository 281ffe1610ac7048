#pragma once

// Per-trial directory layout:
//
//   meta.json       trial_id, viewport_width, viewport_height,
//                   screenshot_width, screenshot_height, query_text,
//                   entry_timestamp (optional)
//   page.html       saved result page
//   screenshot.png  full-page capture, any PNG color type
//   ads.csv         etype,x,y,w,h
//   fixations.csv   x,y,start,end
//   clicks.csv      t,x,y,is_final
//   cursor.csv      t,x,y,kind
//
// A missing meta.json leaves meta empty and a missing stream file leaves the
// stream empty; validation decides what that means. A missing or corrupt
// screenshot or page, or malformed CSV/JSON, raises IngestError.

#include <filesystem>

#include "allserp/core_model.hpp"

namespace allserp {

TrialBundle load_trial_bundle(const std::filesystem::path& dir);

/// Writes the layout above. Output bytes depend only on the bundle.
void write_trial_bundle(const std::filesystem::path& dir, const TrialBundle& bundle);

}  // namespace allserp
