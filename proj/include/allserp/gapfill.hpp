#pragma once

#include <vector>

#include "allserp/core_model.hpp"

namespace allserp {

/// Extends each adjacent organic pair to their shared midpoint
/// m = floor((upper.y1 + lower.y0) / 2). Only pairs of consecutive main-axis
/// AOIs that are both organic, with no other AOI between them in Y, are
/// touched. Everything else is returned unchanged apart from the flavor tag.
/// Throws PipelineError when main-axis AOIs overlap in Y.
std::vector<TypedAoi> gapfill(const std::vector<TypedAoi>& aois);

}  // namespace allserp
