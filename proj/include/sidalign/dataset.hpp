#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sidalign/vocab.hpp"

namespace sidalign {

class SyntheticBackend;

// One test instance: user history, raw CoT text, optional fixed candidate
// list, ground-truth target.
struct EpisodeRecord {
    std::string user;
    std::vector<SemanticId> history;
    std::string cot;
    std::optional<std::vector<SemanticId>> candidates;
    SemanticId target;
};

// JSONL, one record per line:
//   {"user": "...", "history": ["<s_0_3><s_1_7>..."], "cot": "...",
//    "target": "<s_...>", "candidates": ["..."]?}
// Errors carry the 1-based line number.
std::vector<EpisodeRecord> load_dataset(const std::string& path, const Vocabulary& vocab);
std::vector<EpisodeRecord> parse_dataset_jsonl(const std::string& text, const Vocabulary& vocab);

std::string dataset_to_jsonl(const std::vector<EpisodeRecord>& episodes, const Vocabulary& vocab);
void write_dataset_jsonl(const std::string& path, const std::vector<EpisodeRecord>& episodes,
                         const Vocabulary& vocab);

enum class CotStyle { None, Short, Verbose };

CotStyle cot_style_from_string(const std::string& s);  // throws InvalidConfig
std::string_view to_string(CotStyle style);

// Seeded episode generation against the synthetic model. Histories come from
// per-episode mixture users, targets from the drift-free conditional
// base(y|h), CoTs from the top posterior cluster mention plus style-dependent
// filler counts (none: empty; short: <= 8 filler tokens; verbose: 64-128).
std::vector<EpisodeRecord> synth_dataset(const SyntheticBackend& backend, std::size_t n,
                                         CotStyle style, std::uint64_t seed);

}  // namespace sidalign
