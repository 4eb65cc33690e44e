#include "sidalign/diagnose.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

#include "sidalign/align.hpp"
#include "sidalign/errors.hpp"
#include "sidalign/synthetic_backend.hpp"

namespace sidalign {

namespace {

struct SubspaceMass {
    double general_mass = 0.0;
    double sid_mass = 0.0;
    int n_general = 0;
    int n_sid = 0;
};

SubspaceMass subspace_mass(const AttentionProfile& profile) {
    SubspaceMass m;
    for (const auto& entry : profile.entries) {
        switch (entry.tag) {
            case SubspaceTag::General:
                m.general_mass += entry.mass;
                ++m.n_general;
                break;
            case SubspaceTag::SemanticID:
                m.sid_mass += entry.mass;
                ++m.n_sid;
                break;
            case SubspaceTag::Structural:
                break;
        }
    }
    return m;
}

}  // namespace

double sdi(const AttentionProfile& profile) {
    const SubspaceMass m = subspace_mass(profile);
    if (m.n_general == 0) throw MissingSubspace("profile has no General tokens");
    if (m.n_sid == 0) throw MissingSubspace("profile has no SemanticID tokens");
    const double mean_general = m.general_mass / m.n_general;
    const double mean_sid = m.sid_mass / m.n_sid;
    return mean_general / mean_sid;
}

double aei(const AttentionProfile& profile) {
    const SubspaceMass m = subspace_mass(profile);
    if (m.n_general == 0) throw MissingSubspace("profile has no General tokens");
    return 100.0 * m.general_mass / m.n_general;
}

DiagnosticsReport diagnostics_from_profile(const AttentionProfile& profile,
                                           std::string context_label) {
    const SubspaceMass m = subspace_mass(profile);
    DiagnosticsReport r;
    r.sdi = sdi(profile);
    r.aei = aei(profile);
    r.n_general = m.n_general;
    r.n_sid = m.n_sid;
    r.context_label = std::move(context_label);
    return r;
}

PcaResult pca_project(const std::vector<std::vector<double>>& vectors, int k) {
    if (k < 1) throw InvalidConfig("k must be >= 1");
    if (vectors.size() < 2) throw DimensionMismatch("need at least 2 vectors");
    const std::size_t d = vectors.front().size();
    for (const auto& v : vectors)
        if (v.size() != d) throw DimensionMismatch("vectors differ in dimension");
    if (static_cast<int>(d) < k) throw DimensionMismatch("k exceeds the data dimension");

    const std::size_t n = vectors.size();
    Eigen::MatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i][j];

    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    if (centered.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateData("all points are identical");

    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw DegenerateData("eigendecomposition failed");

    const Eigen::VectorXd eigenvalues = solver.eigenvalues();  // ascending
    const Eigen::MatrixXd eigenvectors = solver.eigenvectors();
    double total_variance = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        total_variance += std::max(eigenvalues(i), 0.0);

    PcaResult result;
    result.components.resize(static_cast<std::size_t>(k));
    result.explained_variance_ratio.resize(static_cast<std::size_t>(k));
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(d), k);
    for (int c = 0; c < k; ++c) {
        const Eigen::Index col = eigenvalues.size() - 1 - c;
        Eigen::VectorXd component = eigenvectors.col(col);
        // Deterministic orientation: largest-magnitude entry positive.
        Eigen::Index argmax = 0;
        component.cwiseAbs().maxCoeff(&argmax);
        if (component(argmax) < 0.0) component = -component;
        basis.col(c) = component;
        result.components[static_cast<std::size_t>(c)]
            .assign(component.data(), component.data() + component.size());
        result.explained_variance_ratio[static_cast<std::size_t>(c)] =
            std::max(eigenvalues(col), 0.0) / total_variance;
    }

    const Eigen::MatrixXd projected = centered * basis;
    result.projections.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.projections[i].resize(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c)
            result.projections[i][static_cast<std::size_t>(c)] =
                projected(static_cast<Eigen::Index>(i), c);
    }
    return result;
}

const TokenSeq& diagnostic_instruction_tokens() {
    static const TokenSeq tokens = {"recommend", "the", "next", "item", "for", "this", "user"};
    return tokens;
}

std::pair<DiagnosticsReport, DiagnosticsReport> episode_diagnostics(const ScoringBackend& backend,
                                                                    const EpisodeRecord& episode,
                                                                    int levels,
                                                                    int codes_per_level) {
    if (!backend.capabilities().supports_attention)
        throw UnsupportedCapability("backend does not expose attention");

    const TokenSeq& instruction = diagnostic_instruction_tokens();
    auto with_preamble = [&instruction](TokenSeq ctx) {
        TokenSeq out = instruction;
        out.insert(out.end(), ctx.begin(), ctx.end());
        return out;
    };

    const TokenSeq cot_tokens = split_whitespace(episode.cot);
    const TokenSeq on_ctx =
        with_preamble(think_on_context(episode.history, cot_tokens, levels, codes_per_level));
    const TokenSeq off_ctx =
        with_preamble(think_on_context(episode.history, {}, levels, codes_per_level));

    return {diagnostics_from_profile(backend.attention_profile(on_ctx), "think_on"),
            diagnostics_from_profile(backend.attention_profile(off_ctx), "think_off")};
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

std::string diagnostics_csv(const ScoringBackend& backend,
                            const std::vector<EpisodeRecord>& episodes, int levels,
                            int codes_per_level) {
    std::string out = "context_label,n_general,n_sid,sdi,aei\n";
    for (const auto& ep : episodes) {
        const auto [on, off] = episode_diagnostics(backend, ep, levels, codes_per_level);
        for (const auto* r : {&off, &on}) {
            out += r->context_label;
            out += ',';
            out += std::to_string(r->n_general);
            out += ',';
            out += std::to_string(r->n_sid);
            out += ',';
            out += format_double(r->sdi);
            out += ',';
            out += format_double(r->aei);
            out += '\n';
        }
    }
    return out;
}

std::string projections_csv(const SyntheticBackend& backend) {
    const Vocabulary& vocab = backend.vocabulary();
    std::vector<std::string> tokens;
    std::vector<SubspaceTag> tags;
    for (int level = 0; level < vocab.levels(); ++level) {
        for (int code = 0; code < vocab.codes_per_level(); ++code) {
            tokens.push_back(sid_token(level, code));
            tags.push_back(SubspaceTag::SemanticID);
        }
    }
    for (const auto& token : vocab.general_tokens()) {
        tokens.push_back(token);
        tags.push_back(SubspaceTag::General);
    }

    std::vector<std::vector<double>> embeddings;
    embeddings.reserve(tokens.size());
    for (const auto& token : tokens) embeddings.push_back(backend.token_embedding(token));
    const PcaResult pca = pca_project(embeddings, 2);

    std::string out = "token,tag,pc1,pc2\n";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        out += tokens[i];
        out += ',';
        out += to_string(tags[i]);
        out += ',';
        out += format_double(pca.projections[i][0]);
        out += ',';
        out += format_double(pca.projections[i][1]);
        out += '\n';
    }
    return out;
}

}  // namespace sidalign
