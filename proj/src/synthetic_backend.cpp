#include "sidalign/synthetic_backend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sidalign/errors.hpp"
#include "sidalign/rng.hpp"

namespace sidalign {

namespace {

constexpr std::uint64_t kMaxItems = 1ULL << 20;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<double> softmax(const std::vector<double>& scores) {
    const double m = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - m);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

}  // namespace

std::string strip_trailing_punct(std::string_view token) {
    std::size_t end = token.size();
    while (end > 0) {
        const char c = token[end - 1];
        if (c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':')
            --end;
        else
            break;
    }
    return std::string(token.substr(0, end));
}

void SyntheticModelConfig::validate() const {
    if (levels < 1) throw InvalidConfig("levels must be >= 1");
    if (codes_per_level < 2) throw InvalidConfig("codes_per_level must be >= 2");
    if (k_clusters < 1) throw InvalidConfig("k_clusters must be >= 1");
    if (k_clusters > 1024) throw InvalidConfig("k_clusters too large");
    if (n_general < k_clusters + 4)
        throw InvalidConfig("n_general must cover cluster mentions, scaffold and one filler token");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidConfig("gamma must be in [0, 1]");
    if (!(zipf_s > 0.0)) throw InvalidConfig("zipf_s must be > 0");
    if (!(lambda_sid > 0.0)) throw InvalidConfig("lambda_sid must be > 0");
    if (!(kappa >= 0.0)) throw InvalidConfig("kappa must be >= 0");
    if (!(tau > 0.0)) throw InvalidConfig("tau must be > 0");
    std::uint64_t n = 1;
    for (int l = 0; l < levels; ++l) {
        n *= static_cast<std::uint64_t>(codes_per_level);
        if (n > kMaxItems) throw InvalidConfig("item space C^L too large");
    }
}

std::string SyntheticModelConfig::to_json_string() const {
    nlohmann::ordered_json j;
    j["levels"] = levels;
    j["codes_per_level"] = codes_per_level;
    j["k_clusters"] = k_clusters;
    j["n_general"] = n_general;
    j["gamma"] = gamma;
    j["zipf_s"] = zipf_s;
    j["lambda_sid"] = lambda_sid;
    j["kappa"] = kappa;
    j["tau"] = tau;
    j["seed"] = seed;
    return j.dump(2);
}

SyntheticModelConfig SyntheticModelConfig::from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InvalidConfig("synthetic model JSON is malformed");
    SyntheticModelConfig cfg;
    auto get = [&j](const char* key, auto& field) {
        if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    get("levels", cfg.levels);
    get("codes_per_level", cfg.codes_per_level);
    get("k_clusters", cfg.k_clusters);
    get("n_general", cfg.n_general);
    get("gamma", cfg.gamma);
    get("zipf_s", cfg.zipf_s);
    get("lambda_sid", cfg.lambda_sid);
    get("kappa", cfg.kappa);
    get("tau", cfg.tau);
    get("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

SyntheticModelConfig SyntheticModelConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open synthetic model config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

Vocabulary SyntheticBackend::make_vocabulary(const SyntheticModelConfig& config) {
    std::vector<std::string> general;
    general.reserve(static_cast<std::size_t>(config.n_general));
    for (int k = 0; k < config.k_clusters; ++k) general.push_back("cluster_" + std::to_string(k));
    general.emplace_back("the");
    general.emplace_back("user");
    general.emplace_back("prefers");
    const int fillers = config.n_general - config.k_clusters - 3;
    for (int i = 0; i < fillers; ++i) general.push_back("w" + std::to_string(i));
    return Vocabulary(config.levels, config.codes_per_level, std::move(general));
}

SyntheticBackend::SyntheticBackend(const SyntheticModelConfig& config)
    : SyntheticBackend(config, /*seed_tables=*/true) {}

SyntheticBackend::SyntheticBackend(const SyntheticModelConfig& config, bool seed_tables)
    : config_(config) {
    config_.validate();
    vocab_ = std::make_shared<const Vocabulary>(make_vocabulary(config_));
    n_items_ = vocab_->item_count();
    const int fillers = config_.n_general - config_.k_clusters - 3;
    filler_tokens_.reserve(static_cast<std::size_t>(fillers));
    for (int i = 0; i < fillers; ++i) filler_tokens_.push_back("w" + std::to_string(i));

    if (!seed_tables) return;

    Rng rng(config_.seed);
    const std::size_t n = static_cast<std::size_t>(n_items_);
    const std::size_t k = static_cast<std::size_t>(config_.k_clusters);

    clusters_.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> g(n);
        for (auto& v : g) v = rng.next_normal() / config_.tau;
        clusters_[c] = softmax(g);
    }

    prior_ = rng.next_dirichlet(k);

    std::vector<std::uint64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    popularity_.assign(n, 0.0);
    double norm = 0.0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const double mass = std::pow(static_cast<double>(pos + 1), -config_.zipf_s);
        popularity_[static_cast<std::size_t>(order[pos])] = mass;
        norm += mass;
    }
    for (auto& v : popularity_) v /= norm;

    log_clusters_.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        log_clusters_[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) log_clusters_[c][i] = std::log(clusters_[c][i]);
    }
}

SyntheticBackend SyntheticBackend::with_clusters(const SyntheticModelConfig& config,
                                                 std::vector<std::vector<double>> clusters,
                                                 std::vector<double> prior,
                                                 std::vector<double> popularity) {
    SyntheticBackend b(config, /*seed_tables=*/false);
    const std::size_t n = static_cast<std::size_t>(b.n_items_);
    const std::size_t k = static_cast<std::size_t>(config.k_clusters);
    if (clusters.size() != k) throw InvalidConfig("cluster count mismatch");
    for (const auto& q : clusters) {
        if (q.size() != n) throw InvalidConfig("cluster distribution size mismatch");
        const double s = std::accumulate(q.begin(), q.end(), 0.0);
        if (std::abs(s - 1.0) > 1e-9) throw InvalidConfig("cluster distribution must sum to 1");
        for (double v : q)
            if (!(v > 0.0)) throw InvalidConfig("cluster distribution must be strictly positive");
    }
    if (prior.size() != k) throw InvalidConfig("prior size mismatch");
    if (popularity.size() != n) throw InvalidConfig("popularity size mismatch");
    b.clusters_ = std::move(clusters);
    b.prior_ = std::move(prior);
    b.popularity_ = std::move(popularity);
    b.log_clusters_.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        b.log_clusters_[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) b.log_clusters_[c][i] = std::log(b.clusters_[c][i]);
    }
    return b;
}

BackendCapabilities SyntheticBackend::capabilities() const {
    return {.supports_attention = true, .supports_full_distribution = true};
}

std::string SyntheticBackend::mention_token(int cluster) const {
    return "cluster_" + std::to_string(cluster);
}

ContextFeatures SyntheticBackend::extract_features(const TokenSeq& context) const {
    ContextFeatures f;
    f.mention_counts.assign(static_cast<std::size_t>(config_.k_clusters), 0);
    f.sid_ready = !context.empty() && context.back() == kSidBegin;

    bool in_hist = false;
    std::vector<int> pending;  // codes of the SID currently being assembled
    for (const auto& token : context) {
        if (is_structural_token(token)) {
            if (token == kHistBegin) in_hist = true;
            if (token == kHistEnd) in_hist = false;
            if (token == kCotBegin) f.cot_present = true;
            pending.clear();
            continue;
        }
        if (auto lc = parse_sid_token(token);
            lc && lc->first >= 0 && lc->first < config_.levels && lc->second >= 0 &&
            lc->second < config_.codes_per_level) {
            ++f.n_sid;
            if (in_hist) {
                if (lc->first == static_cast<int>(pending.size())) {
                    pending.push_back(lc->second);
                } else {
                    pending.clear();
                    if (lc->first == 0) pending.push_back(lc->second);
                }
                if (static_cast<int>(pending.size()) == config_.levels) {
                    f.history.emplace_back(pending);
                    pending.clear();
                }
            }
            continue;
        }
        ++f.n_general;
        const std::string bare = strip_trailing_punct(token);
        if (bare.rfind("cluster_", 0) == 0) {
            const std::string num = bare.substr(8);
            if (!num.empty() && num.find_first_not_of("0123456789") == std::string::npos) {
                const int k = std::stoi(num);
                if (k >= 0 && k < config_.k_clusters)
                    ++f.mention_counts[static_cast<std::size_t>(k)];
            }
        }
    }
    return f;
}

double SyntheticBackend::effective_drift(const ContextFeatures& features) const {
    if (features.n_general == 0) return 0.0;
    const double n_gen = static_cast<double>(features.n_general);
    const double n_sid = static_cast<double>(features.n_sid);
    return config_.gamma * n_gen / (n_gen + config_.lambda_sid * n_sid);
}

std::vector<double> SyntheticBackend::posterior(const std::vector<SemanticId>& history,
                                                const std::vector<int>& mention_counts) const {
    const std::size_t k = clusters_.size();
    std::vector<double> log_u(k);
    for (std::size_t c = 0; c < k; ++c) {
        double m = 0.0;
        if (!mention_counts.empty()) m = static_cast<double>(mention_counts[c]);
        log_u[c] = std::log(prior_[c] + m);
        for (const auto& sid : history) {
            if (static_cast<int>(sid.codes.size()) != config_.levels)
                throw MalformedSid("history SID level count mismatch");
            const std::uint64_t idx = sid_to_index(sid, config_.codes_per_level);
            if (idx >= n_items_) throw CodeRangeError("history SID out of range");
            log_u[c] += log_clusters_[c][static_cast<std::size_t>(idx)];
        }
    }
    return softmax(log_u);
}

std::vector<double> SyntheticBackend::base_distribution(const std::vector<SemanticId>& history,
                                                        const std::vector<int>& mention_counts) const {
    const std::size_t n = static_cast<std::size_t>(n_items_);
    const bool any_mention =
        std::any_of(mention_counts.begin(), mention_counts.end(), [](int m) { return m > 0; });
    if (history.empty() && !any_mention)
        return std::vector<double>(n, 1.0 / static_cast<double>(n));
    const std::vector<double> u = posterior(history, mention_counts);
    std::vector<double> out(n, 0.0);
    for (std::size_t c = 0; c < clusters_.size(); ++c) {
        const double w = u[c];
        const auto& q = clusters_[c];
        for (std::size_t i = 0; i < n; ++i) out[i] += w * q[i];
    }
    return out;
}

std::vector<double> SyntheticBackend::item_distribution(const TokenSeq& context) const {
    const ContextFeatures f = extract_features(context);
    std::vector<double> dist = base_distribution(f.history, f.mention_counts);
    if (f.cot_present) {
        const double g = effective_drift(f);
        if (g > 0.0) {
            for (std::size_t i = 0; i < dist.size(); ++i)
                dist[i] = (1.0 - g) * dist[i] + g * popularity_[i];
        }
    }
    return dist;
}

std::vector<double> SyntheticBackend::score_candidates(
    const TokenSeq& context, const std::vector<SemanticId>& candidates) const {
    if (context.empty() || context.back() != kSidBegin)
        throw ContextNotSidReady("context must end with " + std::string(kSidBegin));
    if (candidates.empty()) throw EmptyCandidates("candidate list is empty");
    const std::vector<double> dist = item_distribution(context);
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& sid : candidates) {
        if (static_cast<int>(sid.codes.size()) != config_.levels)
            throw MalformedSid("candidate SID level count mismatch");
        for (int code : sid.codes)
            if (code < 0 || code >= config_.codes_per_level)
                throw CodeRangeError("candidate SID code out of range");
        const std::uint64_t idx = sid_to_index(sid, config_.codes_per_level);
        scores.push_back(std::log(dist[static_cast<std::size_t>(idx)]));
    }
    return scores;
}

std::vector<TokenProb> SyntheticBackend::next_token_dist(const TokenSeq& context) const {
    auto it = std::find(context.rbegin(), context.rend(), std::string(kSidBegin));
    if (it == context.rend())
        throw ContextNotSidReady("context carries no " + std::string(kSidBegin));
    const std::size_t begin_pos = context.size() - 1 - static_cast<std::size_t>(it - context.rbegin());

    std::vector<int> prefix;
    for (std::size_t i = begin_pos + 1; i < context.size(); ++i) {
        const auto lc = parse_sid_token(context[i]);
        if (!lc || lc->first != static_cast<int>(prefix.size()) || lc->second < 0 ||
            lc->second >= config_.codes_per_level)
            throw MalformedSid("invalid SID prefix token: " + context[i]);
        prefix.push_back(lc->second);
    }
    if (static_cast<int>(prefix.size()) > config_.levels)
        throw MalformedSid("SID prefix longer than level count");

    if (static_cast<int>(prefix.size()) == config_.levels)
        return {{std::string(kSidEnd), 1.0}};

    const TokenSeq prompt(context.begin(), context.begin() + static_cast<std::ptrdiff_t>(begin_pos + 1));
    const std::vector<double> dist = item_distribution(prompt);

    const int level = static_cast<int>(prefix.size());
    std::uint64_t block = 1;
    for (int l = level; l < config_.levels; ++l) block *= static_cast<std::uint64_t>(config_.codes_per_level);
    std::uint64_t start = 0;
    for (int code : prefix) start = start * static_cast<std::uint64_t>(config_.codes_per_level) +
                                    static_cast<std::uint64_t>(code);
    start *= block;
    const std::uint64_t child = block / static_cast<std::uint64_t>(config_.codes_per_level);

    double denom = 0.0;
    for (std::uint64_t i = start; i < start + block; ++i) denom += dist[static_cast<std::size_t>(i)];

    std::vector<TokenProb> out;
    out.reserve(static_cast<std::size_t>(config_.codes_per_level));
    for (int j = 0; j < config_.codes_per_level; ++j) {
        double num = 0.0;
        const std::uint64_t lo = start + static_cast<std::uint64_t>(j) * child;
        for (std::uint64_t i = lo; i < lo + child; ++i) num += dist[static_cast<std::size_t>(i)];
        out.push_back({sid_token(level, j), num / denom});
    }
    return out;
}

AttentionProfile SyntheticBackend::attention_profile(const TokenSeq& context) const {
    const ContextFeatures f = extract_features(context);
    const double g = effective_drift(f);
    const double general_salience = 1.0 + config_.kappa * g;

    AttentionProfile profile;
    std::vector<double> saliences;
    for (const auto& token : context) {
        if (is_structural_token(token)) continue;
        const auto lc = parse_sid_token(token);
        const bool is_sid = lc && lc->first >= 0 && lc->first < config_.levels && lc->second >= 0 &&
                            lc->second < config_.codes_per_level;
        profile.entries.push_back(
            {token, is_sid ? SubspaceTag::SemanticID : SubspaceTag::General, 0.0});
        saliences.push_back(is_sid ? 1.0 : general_salience);
    }
    if (saliences.empty()) return profile;
    const std::vector<double> masses = softmax(saliences);
    for (std::size_t i = 0; i < masses.size(); ++i) profile.entries[i].mass = masses[i];
    return profile;
}

std::vector<double> SyntheticBackend::token_embedding(const std::string& token) const {
    double axis = 0.0;
    if (!is_structural_token(token)) {
        const auto lc = parse_sid_token(token);
        const bool is_sid = lc && lc->first >= 0 && lc->first < config_.levels && lc->second >= 0 &&
                            lc->second < config_.codes_per_level;
        axis = is_sid ? 2.0 : -2.0;
    }
    Rng rng(mix_seed(config_.seed, fnv1a(token)));
    std::vector<double> v(static_cast<std::size_t>(embedding_dim()));
    for (auto& x : v) x = 0.5 * rng.next_normal();
    v[0] += axis;
    return v;
}

}  // namespace sidalign
