#include "sidalign/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <json.hpp>

#include "sidalign/errors.hpp"

namespace sidalign {

bool is_structural_token(std::string_view token) {
    return std::find(kStructuralTokens.begin(), kStructuralTokens.end(), token) !=
           kStructuralTokens.end();
}

std::string_view to_string(SubspaceTag tag) {
    switch (tag) {
        case SubspaceTag::SemanticID: return "SemanticID";
        case SubspaceTag::General: return "General";
        case SubspaceTag::Structural: return "Structural";
    }
    return "?";
}

Vocabulary::Vocabulary(int levels, int codes_per_level, std::vector<std::string> general_tokens)
    : levels_(levels), codes_per_level_(codes_per_level), general_tokens_(std::move(general_tokens)) {
    if (levels_ < 1) throw InvalidConfig("levels must be >= 1");
    if (codes_per_level_ < 2) throw InvalidConfig("codes_per_level must be >= 2");
    for (const auto& tok : general_tokens_) {
        if (tok.empty()) throw InvalidConfig("general token must be non-empty");
        if (is_structural_token(tok))
            throw InvalidConfig("general token collides with structural token: " + tok);
        if (auto lc = parse_sid_token(tok);
            lc && lc->first >= 0 && lc->first < levels_ && lc->second < codes_per_level_)
            throw InvalidConfig("general token collides with SID token: " + tok);
        if (!general_set_.insert(tok).second)
            throw InvalidConfig("duplicate general token: " + tok);
    }
}

std::uint64_t Vocabulary::item_count() const {
    std::uint64_t n = 1;
    for (int l = 0; l < levels_; ++l) n *= static_cast<std::uint64_t>(codes_per_level_);
    return n;
}

bool Vocabulary::contains_general(std::string_view token) const {
    return general_set_.count(std::string(token)) > 0;
}

bool Vocabulary::sid_valid(const SemanticId& sid) const {
    if (static_cast<int>(sid.codes.size()) != levels_) return false;
    for (int c : sid.codes)
        if (c < 0 || c >= codes_per_level_) return false;
    return true;
}

std::string Vocabulary::to_json_string() const {
    nlohmann::ordered_json j;
    j["levels"] = levels_;
    j["codes_per_level"] = codes_per_level_;
    j["general_tokens"] = general_tokens_;
    return j.dump();
}

Vocabulary Vocabulary::from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InvalidConfig("vocabulary JSON is malformed");
    if (!j.contains("levels") || !j.contains("codes_per_level"))
        throw InvalidConfig("vocabulary JSON missing levels/codes_per_level");
    std::vector<std::string> general;
    if (j.contains("general_tokens")) general = j["general_tokens"].get<std::vector<std::string>>();
    return Vocabulary(j["levels"].get<int>(), j["codes_per_level"].get<int>(), std::move(general));
}

std::string sid_token(int level, int code) {
    return "<s_" + std::to_string(level) + "_" + std::to_string(code) + ">";
}

std::optional<std::pair<int, int>> parse_sid_token(std::string_view token) {
    // Grammar: "<s_" digits "_" digits ">"
    if (token.size() < 7 || token.substr(0, 3) != "<s_" || token.back() != '>') return std::nullopt;
    const std::string_view body = token.substr(3, token.size() - 4);
    const std::size_t sep = body.find('_');
    if (sep == std::string_view::npos || sep == 0 || sep + 1 >= body.size()) return std::nullopt;
    const std::string_view level_str = body.substr(0, sep);
    const std::string_view code_str = body.substr(sep + 1);
    auto all_digits = [](std::string_view s) {
        return std::all_of(s.begin(), s.end(),
                           [](unsigned char c) { return std::isdigit(c) != 0; });
    };
    if (!all_digits(level_str) || !all_digits(code_str)) return std::nullopt;
    int level = 0, code = 0;
    if (std::from_chars(level_str.data(), level_str.data() + level_str.size(), level).ec !=
        std::errc{})
        return std::nullopt;
    if (std::from_chars(code_str.data(), code_str.data() + code_str.size(), code).ec != std::errc{})
        return std::nullopt;
    return std::make_pair(level, code);
}

std::string render_sid(const SemanticId& sid, const Vocabulary& vocab) {
    if (static_cast<int>(sid.codes.size()) != vocab.levels())
        throw MalformedSid("SID has " + std::to_string(sid.codes.size()) + " levels, vocabulary has " +
                           std::to_string(vocab.levels()));
    std::string out;
    for (int level = 0; level < vocab.levels(); ++level) {
        const int code = sid.codes[static_cast<std::size_t>(level)];
        if (code < 0 || code >= vocab.codes_per_level())
            throw CodeRangeError("code " + std::to_string(code) + " out of range at level " +
                                 std::to_string(level));
        out += sid_token(level, code);
    }
    return out;
}

SemanticId parse_sid(std::string_view text, const Vocabulary& vocab) {
    std::vector<std::pair<int, int>> parts;
    std::string_view rest = text;
    while (!rest.empty()) {
        const std::size_t close = rest.find('>');
        if (close == std::string_view::npos)
            throw MalformedSid("unterminated token in \"" + std::string(text) + "\"");
        const std::string_view tok = rest.substr(0, close + 1);
        const auto lc = parse_sid_token(tok);
        if (!lc) throw MalformedSid("not a SID token: \"" + std::string(tok) + "\"");
        parts.push_back(*lc);
        rest.remove_prefix(close + 1);
    }
    if (static_cast<int>(parts.size()) != vocab.levels())
        throw MalformedSid("expected " + std::to_string(vocab.levels()) + " SID tokens, got " +
                           std::to_string(parts.size()));
    SemanticId sid;
    sid.codes.reserve(parts.size());
    for (int level = 0; level < vocab.levels(); ++level) {
        const auto [tok_level, code] = parts[static_cast<std::size_t>(level)];
        if (tok_level != level)
            throw LevelOrderError("expected level " + std::to_string(level) + ", got " +
                                  std::to_string(tok_level));
        if (code >= vocab.codes_per_level())
            throw CodeRangeError("code " + std::to_string(code) + " >= " +
                                 std::to_string(vocab.codes_per_level()));
        sid.codes.push_back(code);
    }
    return sid;
}

SubspaceTag classify_token(std::string_view token, const Vocabulary& vocab) {
    if (is_structural_token(token)) return SubspaceTag::Structural;
    if (auto lc = parse_sid_token(token)) {
        if (lc->first >= 0 && lc->first < vocab.levels() && lc->second >= 0 &&
            lc->second < vocab.codes_per_level())
            return SubspaceTag::SemanticID;
        throw UnknownToken("SID-shaped token out of vocabulary range: " + std::string(token));
    }
    if (vocab.contains_general(token)) return SubspaceTag::General;
    throw UnknownToken("token not in vocabulary: " + std::string(token));
}

std::uint64_t sid_to_index(const SemanticId& sid, int codes_per_level) {
    std::uint64_t idx = 0;
    for (int code : sid.codes)
        idx = idx * static_cast<std::uint64_t>(codes_per_level) + static_cast<std::uint64_t>(code);
    return idx;
}

SemanticId index_to_sid(std::uint64_t index, int levels, int codes_per_level) {
    SemanticId sid;
    sid.codes.assign(static_cast<std::size_t>(levels), 0);
    for (int level = levels - 1; level >= 0; --level) {
        sid.codes[static_cast<std::size_t>(level)] =
            static_cast<int>(index % static_cast<std::uint64_t>(codes_per_level));
        index /= static_cast<std::uint64_t>(codes_per_level);
    }
    return sid;
}

TokenSeq split_whitespace(std::string_view text) {
    TokenSeq out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

std::string join_tokens(const TokenSeq& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace sidalign
