#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sidalign {

// Structural delimiters shared by every context layout.
inline constexpr std::string_view kHistBegin = "<|hist_begin|>";
inline constexpr std::string_view kHistEnd = "<|hist_end|>";
inline constexpr std::string_view kHistEmpty = "<|hist_empty|>";
inline constexpr std::string_view kCotBegin = "<|cot_begin|>";
inline constexpr std::string_view kCotEnd = "<|cot_end|>";
inline constexpr std::string_view kSidBegin = "<|sid_begin|>";
inline constexpr std::string_view kSidEnd = "<|sid_end|>";

inline constexpr std::array<std::string_view, 7> kStructuralTokens = {
    kHistBegin, kHistEnd, kHistEmpty, kCotBegin, kCotEnd, kSidBegin, kSidEnd,
};

bool is_structural_token(std::string_view token);

using TokenSeq = std::vector<std::string>;

enum class SubspaceTag { SemanticID, General, Structural };

std::string_view to_string(SubspaceTag tag);

// One item identity: an L-level hierarchical code tuple. Lexicographic order
// on the codes is the tie-break order used everywhere.
struct SemanticId {
    std::vector<int> codes;

    SemanticId() = default;
    explicit SemanticId(std::vector<int> c) : codes(std::move(c)) {}

    auto operator<=>(const SemanticId&) const = default;
};

// Partitioned token universe: SID code tokens, general (text) tokens, and the
// fixed structural set. The three classes are disjoint by construction.
class Vocabulary {
  public:
    Vocabulary(int levels, int codes_per_level, std::vector<std::string> general_tokens);

    int levels() const { return levels_; }
    int codes_per_level() const { return codes_per_level_; }
    const std::vector<std::string>& general_tokens() const { return general_tokens_; }

    std::uint64_t item_count() const;
    bool contains_general(std::string_view token) const;
    bool sid_valid(const SemanticId& sid) const;

    std::string to_json_string() const;
    static Vocabulary from_json_string(const std::string& text);

  private:
    int levels_;
    int codes_per_level_;
    std::vector<std::string> general_tokens_;
    std::unordered_set<std::string> general_set_;
};

// SID textual codec: "<s_{level}_{code}>" per level, levels ascending from 0.
std::string sid_token(int level, int code);
std::string render_sid(const SemanticId& sid, const Vocabulary& vocab);
SemanticId parse_sid(std::string_view text, const Vocabulary& vocab);

// Parses one "<s_l_c>" token without range checks; nullopt when the grammar
// does not match.
std::optional<std::pair<int, int>> parse_sid_token(std::string_view token);

SubspaceTag classify_token(std::string_view token, const Vocabulary& vocab);

// Mixed-radix index of a SID, most-significant level first, so index order
// equals lexicographic order.
std::uint64_t sid_to_index(const SemanticId& sid, int codes_per_level);
SemanticId index_to_sid(std::uint64_t index, int levels, int codes_per_level);

// Splits on ASCII whitespace; the budget-accounting tokenizer for CoT text.
TokenSeq split_whitespace(std::string_view text);

std::string join_tokens(const TokenSeq& tokens);

}  // namespace sidalign
