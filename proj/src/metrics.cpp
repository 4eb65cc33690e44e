#include "sidalign/metrics.hpp"

#include <cmath>
#include <set>

#include "sidalign/errors.hpp"

namespace sidalign {

namespace {

// 1-based rank of the target, 0 if absent. Throws on duplicate entries.
std::size_t rank_of(const std::vector<SemanticId>& ranking, const SemanticId& target) {
    std::set<SemanticId> seen;
    std::size_t rank = 0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (!seen.insert(ranking[i]).second)
            throw DuplicateInRanking("duplicate SID at position " + std::to_string(i + 1));
        if (rank == 0 && ranking[i] == target) rank = i + 1;
    }
    return rank;
}

}  // namespace

int recall_at_k(const std::vector<SemanticId>& ranking, const SemanticId& target, int k) {
    if (k < 1) throw InvalidConfig("K must be >= 1");
    const std::size_t rank = rank_of(ranking, target);
    return (rank >= 1 && rank <= static_cast<std::size_t>(k)) ? 1 : 0;
}

double ndcg_at_k(const std::vector<SemanticId>& ranking, const SemanticId& target, int k) {
    if (k < 1) throw InvalidConfig("K must be >= 1");
    const std::size_t rank = rank_of(ranking, target);
    if (rank < 1 || rank > static_cast<std::size_t>(k)) return 0.0;
    return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

}  // namespace sidalign
