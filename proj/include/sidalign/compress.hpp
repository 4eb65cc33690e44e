#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sidalign {

// Fixed sentence opener of every compressed chain.
inline constexpr std::string_view kPreferenceTemplatePrefix = "The current user's preference is";

// System message sent verbatim to a remote compressor endpoint.
extern const std::string kCompressSystemPrompt;

struct CompressorConfig {
    int budget = 32;  // max whitespace tokens of the compressed sentence
    std::vector<std::string> cue_lexicon;
    std::vector<std::string> filler_lexicon;

    static CompressorConfig defaults();
    void validate() const;  // throws InvalidConfig
};

enum class CompressIssue { TemplateMismatch, BudgetExceeded };

struct ValidationResult {
    std::vector<CompressIssue> issues;
    bool ok() const { return issues.empty(); }
};

// Accepts iff the candidate matches
//   ^The current user's preference is .+\.$
// and stays within the token budget.
ValidationResult validate_compressed(const std::string& candidate, const CompressorConfig& cfg);

// Deterministic rule-based compressor: strip filler phrases, take the last
// cue-bearing sentence, keep the text after the cue, render it into the fixed
// template under the budget. Cue-free input falls back to
// "The current user's preference is unknown." Idempotent.
std::string compress_rule_based(const std::string& cot, const CompressorConfig& cfg);

// Delegates to POST {endpoint}/v1/compress with the bundled system prompt.
// A conforming sentence embedded in extra text is extracted; otherwise
// NonConformingReply. Oversized replies raise BudgetExceeded; transport
// failures raise RemoteUnavailable.
std::string compress_remote(const std::string& cot, const std::string& endpoint,
                            const CompressorConfig& cfg);

}  // namespace sidalign
