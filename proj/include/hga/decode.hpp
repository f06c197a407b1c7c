#pragma once

#include "hga/document.hpp"
#include "hga/hga_head.hpp"

namespace hga {

enum class OverlapPolicy { kGreedyByScore };

struct DecodeConfig {
  double threshold = 0.0;
  OverlapPolicy overlap_policy = OverlapPolicy::kGreedyByScore;
};

// 1. candidates: cells (t, i, j), i <= j, both tokens kept, score > threshold;
// 2. per span [i, j] keep only the highest-scoring type (lower index on ties);
// 3. accept spans by descending score, skipping any that intersects an
//    accepted span. Ties order by earlier start, then shorter span, then
//    lower type.
// Result sorted by (start, end, type).
EntitySet decode(const ScoreTensor& s, const DecodeConfig& cfg = {});

}  // namespace hga
