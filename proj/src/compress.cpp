#include "sidalign/compress.hpp"

#include <algorithm>
#include <cctype>

#include <httplib.h>
#include <json.hpp>

#include "sidalign/errors.hpp"
#include "sidalign/vocab.hpp"

namespace sidalign {

const std::string kCompressSystemPrompt =
    "You are a user profiling expert. Please read the analysis process below and directly "
    "summarize the user's core preferences.\n"
    "\n"
    "Requirements:\n"
    "1. Ignore filler words such as 'I need to analyze', 'First', etc.\n"
    "2. Provide only one conclusion sentence.\n"
    "3. Format: The current user's preference is [summary content].\n"
    "\n"
    "Input Example: I need to analyze the viewing history. First, the user repeatedly watches "
    "sci-fi movies. Overall, that is consistent.\n"
    "Output Example: The current user's preference is sci-fi movies.\n";

CompressorConfig CompressorConfig::defaults() {
    CompressorConfig cfg;
    cfg.budget = 32;
    cfg.cue_lexicon = {
        "repeatedly watches", "repeatedly buys", "repeatedly listens to", "is interested in",
        "gravitates toward",  "preference is",   "prefers",               "likes",
        "enjoys",             "favors",          "watches",               "buys",
        "listens to",
    };
    cfg.filler_lexicon = {
        "I need to analyze",  "Let me think", "Let's see",  "First of all", "First",
        "Okay",               "Well",         "Overall",    "In summary",   "Step by step",
        "Next",               "Then",         "To sum up",  "hmm",
    };
    return cfg;
}

void CompressorConfig::validate() const {
    if (budget < 4) throw InvalidConfig("compressor budget must be >= 4");
    for (const auto& cue : cue_lexicon)
        if (cue.empty()) throw InvalidConfig("cue pattern must be non-empty");
    for (const auto& filler : filler_lexicon)
        if (filler.empty()) throw InvalidConfig("filler phrase must be non-empty");
}

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool boundary_at(const std::string& text, std::size_t pos, std::size_t len) {
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const bool right_ok = pos + len >= text.size() || !is_word_char(text[pos + len]);
    return left_ok && right_ok;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string trim_punct_and_space(std::string_view s) {
    auto is_junk = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '.' || c == '!' ||
               c == '?' || c == ';' || c == ':';
    };
    std::size_t b = 0, e = s.size();
    while (b < e && is_junk(s[b])) ++b;
    while (e > b && is_junk(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

bool matches_template(const std::string& candidate) {
    const std::string opener = std::string(kPreferenceTemplatePrefix) + " ";
    if (candidate.size() <= opener.size() + 1) return false;
    if (candidate.rfind(opener, 0) != 0) return false;
    if (candidate.back() != '.') return false;
    // At least one non-space content character between the opener and the dot.
    const std::string_view content(candidate.data() + opener.size(),
                                   candidate.size() - opener.size() - 1);
    return !trim(content).empty();
}

int token_count(const std::string& text) {
    return static_cast<int>(split_whitespace(text).size());
}

// Removes word-boundary occurrences of every filler phrase, longest first.
std::string strip_fillers(std::string sentence, const std::vector<std::string>& fillers) {
    std::vector<std::string> ordered = fillers;
    std::sort(ordered.begin(), ordered.end(), [](const std::string& a, const std::string& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a < b;
    });
    for (const auto& phrase : ordered) {
        std::size_t pos = 0;
        while ((pos = sentence.find(phrase, pos)) != std::string::npos) {
            if (boundary_at(sentence, pos, phrase.size())) {
                sentence.replace(pos, phrase.size(), " ");
            } else {
                pos += phrase.size();
            }
        }
    }
    return sentence;
}

// Leftmost cue occurrence (ties to the longest pattern); returns the text
// after the cue, or an empty string when no cue matches.
std::string content_after_cue(const std::string& sentence, const std::vector<std::string>& cues) {
    std::size_t best_pos = std::string::npos;
    std::size_t best_len = 0;
    for (const auto& cue : cues) {
        std::size_t pos = 0;
        while ((pos = sentence.find(cue, pos)) != std::string::npos) {
            if (boundary_at(sentence, pos, cue.size())) {
                if (pos < best_pos || (pos == best_pos && cue.size() > best_len)) {
                    best_pos = pos;
                    best_len = cue.size();
                }
                break;
            }
            ++pos;
        }
    }
    if (best_pos == std::string::npos) return "";
    return trim_punct_and_space(sentence.substr(best_pos + best_len));
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?' || c == ';' || c == '\n') {
            if (!trim(current).empty()) out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!trim(current).empty()) out.push_back(current);
    return out;
}

std::string render_template(const std::string& content, int budget) {
    TokenSeq tokens = split_whitespace(content);
    // Opener is 5 tokens and the period rides the last content token.
    const int max_content = std::max(1, budget - 5);
    if (static_cast<int>(tokens.size()) > max_content)
        tokens.resize(static_cast<std::size_t>(max_content));
    return std::string(kPreferenceTemplatePrefix) + " " + join_tokens(tokens) + ".";
}

}  // namespace

ValidationResult validate_compressed(const std::string& candidate, const CompressorConfig& cfg) {
    cfg.validate();
    ValidationResult result;
    if (!matches_template(candidate)) result.issues.push_back(CompressIssue::TemplateMismatch);
    if (token_count(candidate) > cfg.budget) result.issues.push_back(CompressIssue::BudgetExceeded);
    return result;
}

std::string compress_rule_based(const std::string& cot, const CompressorConfig& cfg) {
    cfg.validate();
    const std::string input = trim(cot);
    if (matches_template(input) && token_count(input) <= cfg.budget) return input;

    std::string content;
    for (const auto& sentence : split_sentences(input)) {
        const std::string stripped = strip_fillers(sentence, cfg.filler_lexicon);
        const std::string candidate = content_after_cue(stripped, cfg.cue_lexicon);
        if (!candidate.empty()) content = candidate;  // recency: keep the last cue hit
    }
    if (content.empty()) content = "unknown";
    return render_template(content, cfg.budget);
}

std::string compress_remote(const std::string& cot, const std::string& endpoint,
                            const CompressorConfig& cfg) {
    cfg.validate();
    httplib::Client client(endpoint);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(30, 0);

    nlohmann::json body;
    body["system"] = kCompressSystemPrompt;
    body["cot"] = cot;
    auto res = client.Post("/v1/compress", body.dump(), "application/json");
    if (!res) throw RemoteUnavailable("compress endpoint unreachable: " + endpoint);
    if (res->status != 200)
        throw RemoteUnavailable("compress endpoint returned HTTP " + std::to_string(res->status));

    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("summary") || !reply["summary"].is_string())
        throw NonConformingReply("compress reply carries no summary string");

    const std::string summary = trim(reply["summary"].get<std::string>());
    std::string sentence;
    if (matches_template(summary)) {
        sentence = summary;
    } else {
        // Extract an embedded template sentence, opener through the next dot.
        const std::size_t start = summary.find(kPreferenceTemplatePrefix);
        if (start == std::string::npos)
            throw NonConformingReply("reply does not contain the preference template");
        const std::size_t dot = summary.find('.', start);
        if (dot == std::string::npos)
            throw NonConformingReply("embedded template sentence is unterminated");
        sentence = summary.substr(start, dot - start + 1);
        if (!matches_template(sentence))
            throw NonConformingReply("embedded template sentence is empty");
    }
    if (token_count(sentence) > cfg.budget)
        throw BudgetExceeded("remote summary exceeds the token budget");
    return sentence;
}

}  // namespace sidalign
