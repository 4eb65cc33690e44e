#include "sidalign/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sidalign/errors.hpp"
#include "sidalign/rng.hpp"
#include "sidalign/synthetic_backend.hpp"

namespace sidalign {

namespace {

SemanticId parse_sid_checked(const std::string& text, const Vocabulary& vocab, std::size_t line) {
    try {
        return parse_sid(text, vocab);
    } catch (const Error& e) {
        throw InvalidSid(line, "invalid SID \"" + text + "\": " + e.what());
    }
}

}  // namespace

std::vector<EpisodeRecord> parse_dataset_jsonl(const std::string& text, const Vocabulary& vocab) {
    std::vector<EpisodeRecord> out;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ParseError(line_no, "not a JSON object");

        auto require = [&](const char* field) -> const nlohmann::json& {
            if (!j.contains(field)) throw MissingField(line_no, field);
            return j[field];
        };

        EpisodeRecord ep;
        const auto& user = require("user");
        if (!user.is_string()) throw ParseError(line_no, "\"user\" must be a string");
        ep.user = user.get<std::string>();

        const auto& history = require("history");
        if (!history.is_array() || history.empty())
            throw ParseError(line_no, "\"history\" must be a non-empty array");
        for (const auto& h : history) {
            if (!h.is_string()) throw ParseError(line_no, "\"history\" entries must be strings");
            ep.history.push_back(parse_sid_checked(h.get<std::string>(), vocab, line_no));
        }

        const auto& cot = require("cot");
        if (!cot.is_string()) throw ParseError(line_no, "\"cot\" must be a string");
        ep.cot = cot.get<std::string>();

        const auto& target = require("target");
        if (!target.is_string()) throw ParseError(line_no, "\"target\" must be a string");
        ep.target = parse_sid_checked(target.get<std::string>(), vocab, line_no);

        if (j.contains("candidates")) {
            const auto& cands = j["candidates"];
            if (!cands.is_array() || cands.empty())
                throw ParseError(line_no, "\"candidates\" must be a non-empty array");
            std::vector<SemanticId> parsed;
            std::set<SemanticId> seen;
            for (const auto& c : cands) {
                if (!c.is_string()) throw ParseError(line_no, "\"candidates\" entries must be strings");
                SemanticId sid = parse_sid_checked(c.get<std::string>(), vocab, line_no);
                if (!seen.insert(sid).second)
                    throw ParseError(line_no, "\"candidates\" must be deduplicated");
                parsed.push_back(std::move(sid));
            }
            ep.candidates = std::move(parsed);
        }
        out.push_back(std::move(ep));
    }
    return out;
}

std::vector<EpisodeRecord> load_dataset(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open dataset: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_dataset_jsonl(buf.str(), vocab);
}

std::string dataset_to_jsonl(const std::vector<EpisodeRecord>& episodes, const Vocabulary& vocab) {
    std::string out;
    for (const auto& ep : episodes) {
        nlohmann::ordered_json j;
        j["user"] = ep.user;
        nlohmann::ordered_json hist = nlohmann::ordered_json::array();
        for (const auto& sid : ep.history) hist.push_back(render_sid(sid, vocab));
        j["history"] = std::move(hist);
        j["cot"] = ep.cot;
        j["target"] = render_sid(ep.target, vocab);
        if (ep.candidates) {
            nlohmann::ordered_json cands = nlohmann::ordered_json::array();
            for (const auto& sid : *ep.candidates) cands.push_back(render_sid(sid, vocab));
            j["candidates"] = std::move(cands);
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_dataset_jsonl(const std::string& path, const std::vector<EpisodeRecord>& episodes,
                         const Vocabulary& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidConfig("cannot open output file: " + path);
    out << dataset_to_jsonl(episodes, vocab);
}

CotStyle cot_style_from_string(const std::string& s) {
    if (s == "none") return CotStyle::None;
    if (s == "short") return CotStyle::Short;
    if (s == "verbose") return CotStyle::Verbose;
    throw InvalidConfig("unknown cot style: " + s + " (expected none|short|verbose)");
}

std::string_view to_string(CotStyle style) {
    switch (style) {
        case CotStyle::None: return "none";
        case CotStyle::Short: return "short";
        case CotStyle::Verbose: return "verbose";
    }
    return "?";
}

namespace {

std::size_t sample_from(const std::vector<double>& dist, Rng& rng) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) return i;
    }
    return dist.size() - 1;
}

}  // namespace

std::vector<EpisodeRecord> synth_dataset(const SyntheticBackend& backend, std::size_t n,
                                         CotStyle style, std::uint64_t seed) {
    const auto& cfg = backend.config();
    const auto& clusters = backend.cluster_distributions();
    const auto& fillers = backend.filler_tokens();

    std::vector<EpisodeRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(mix_seed(seed, i));
        EpisodeRecord ep;
        ep.user = "u" + std::to_string(i);

        // Mixture user: Dirichlet weights over clusters, history i.i.d. from
        // the implied item mixture.
        const std::vector<double> weights = rng.next_dirichlet(clusters.size());
        const std::size_t hist_len = 3 + static_cast<std::size_t>(rng.next_below(6));
        for (std::size_t t = 0; t < hist_len; ++t) {
            const std::size_t k = sample_from(weights, rng);
            const std::size_t item = sample_from(clusters[k], rng);
            ep.history.push_back(index_to_sid(item, cfg.levels, cfg.codes_per_level));
        }

        // Target from the drift-free conditional, so drift hurts by
        // construction.
        const std::vector<double> base = backend.base_distribution(ep.history);
        ep.target = index_to_sid(sample_from(base, rng), cfg.levels, cfg.codes_per_level);

        if (style != CotStyle::None) {
            const std::vector<double> posterior = backend.posterior(ep.history, {});
            const std::size_t top_cluster = static_cast<std::size_t>(
                std::max_element(posterior.begin(), posterior.end()) - posterior.begin());
            // Scaffold "the user prefers" costs 3 filler tokens; style bounds
            // count every non-mention token.
            const std::size_t extra = style == CotStyle::Short
                                          ? rng.next_below(6)
                                          : 61 + rng.next_below(65);
            std::string cot;
            for (std::size_t t = 0; t < extra; ++t) {
                cot += fillers[rng.next_below(fillers.size())];
                cot += ' ';
            }
            cot += "the user prefers ";
            cot += backend.mention_token(static_cast<int>(top_cluster));
            cot += '.';
            ep.cot = std::move(cot);
        }
        out.push_back(std::move(ep));
    }
    return out;
}

}  // namespace sidalign
