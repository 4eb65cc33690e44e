#pragma once

#include <vector>

#include "sidalign/vocab.hpp"

namespace sidalign {

// 1 iff the target appears within the first K entries. The ranking must be
// duplicate-free.
int recall_at_k(const std::vector<SemanticId>& ranking, const SemanticId& target, int k);

// 1/log2(1+rank) for a 1-based rank <= K, else 0; single-relevant-item form,
// so the ideal DCG is 1 and NDCG@1 equals Recall@1.
double ndcg_at_k(const std::vector<SemanticId>& ranking, const SemanticId& target, int k);

}  // namespace sidalign
