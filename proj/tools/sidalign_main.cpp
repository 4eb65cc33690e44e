// Command-line frontend: synth, rerank, eval, diagnose, compress.
// Exit codes: 0 success, 2 usage/validation errors, 1 downstream failures.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sidalign/align.hpp"
#include "sidalign/compress.hpp"
#include "sidalign/dataset.hpp"
#include "sidalign/diagnose.hpp"
#include "sidalign/errors.hpp"
#include "sidalign/experiment.hpp"
#include "sidalign/remote_backend.hpp"
#include "sidalign/synthetic_backend.hpp"

namespace {

using sidalign::InvalidConfig;

struct BackendHandle {
    std::unique_ptr<sidalign::ScoringBackend> backend;
    sidalign::SyntheticBackend* synth = nullptr;  // set when the backend is synthetic
    int levels = 0;
    int codes = 0;
};

// "synth:<model.json>" or "remote:<url>"; remote needs explicit dimensions.
BackendHandle make_backend(const std::string& spec, int remote_levels, int remote_codes) {
    if (spec.rfind("synth:", 0) == 0) {
        const std::string path = spec.substr(6);
        auto cfg = sidalign::SyntheticModelConfig::from_json_file(path);
        auto owned = std::make_unique<sidalign::SyntheticBackend>(cfg);
        BackendHandle h;
        h.synth = owned.get();
        h.levels = cfg.levels;
        h.codes = cfg.codes_per_level;
        h.backend = std::move(owned);
        return h;
    }
    if (spec.rfind("remote:", 0) == 0) {
        sidalign::RemoteBackendConfig cfg;
        cfg.base_url = spec.substr(7);
        BackendHandle h;
        h.backend = std::make_unique<sidalign::RemoteBackend>(cfg);
        h.levels = remote_levels;
        h.codes = remote_codes;
        return h;
    }
    throw InvalidConfig("backend spec must be synth:<config.json> or remote:<url>");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidConfig("cannot open output file: " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open input file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::optional<std::string>& path, const std::string& content) {
    if (path)
        write_file(*path, content);
    else
        std::cout << content;
}

// Flag -> file -> built-in default. Applies config-file values to options the
// command line left untouched.
class ConfigLayer {
  public:
    explicit ConfigLayer(const std::optional<std::string>& explicit_path) {
        std::string path;
        if (explicit_path) {
            path = *explicit_path;
        } else if (const char* env = std::getenv("SIDALIGN_CONFIG")) {
            path = env;
        }
        if (path.empty()) return;
        doc_ = nlohmann::json::parse(read_file(path), nullptr, false);
        if (doc_.is_discarded() || !doc_.is_object())
            throw InvalidConfig("config file is not a JSON object: " + path);
    }

    template <typename T>
    void apply(const CLI::Option* opt, const char* key, T& value) const {
        if (opt->count() > 0 || !doc_.is_object() || !doc_.contains(key)) return;
        value = doc_[key].get<T>();
    }

  private:
    nlohmann::json doc_;
};

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        out.push_back(std::stod(part));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        out.push_back(std::stoi(part));
    }
    return out;
}

struct CommonOpts {
    std::string backend_spec;
    std::optional<std::string> config_path;
    double alpha = 0.5;
    double epsilon = 1e-6;
    int beams = 32;
    int returns = 32;
    int budget = 32;
    int workers = 1;
    int levels = 3;
    int codes = 8;
    std::string policy = "union";

    CLI::Option* backend_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;
    CLI::Option* epsilon_opt = nullptr;
    CLI::Option* beams_opt = nullptr;
    CLI::Option* returns_opt = nullptr;
    CLI::Option* budget_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* levels_opt = nullptr;
    CLI::Option* codes_opt = nullptr;

    void attach(CLI::App* cmd, bool with_backend = true) {
        if (with_backend)
            backend_opt = cmd->add_option("--backend", backend_spec,
                                          "synth:<model.json> or remote:<url>")
                              ->required();
        cmd->add_option("--config", config_path,
                        "JSON config file (or set SIDALIGN_CONFIG); flags win");
        alpha_opt = cmd->add_option("--alpha", alpha, "correction strength");
        epsilon_opt = cmd->add_option("--epsilon", epsilon, "normalization stabilizer");
        beams_opt = cmd->add_option("--beams", beams, "beam width");
        returns_opt = cmd->add_option("--returns", returns, "sequences returned per beam search");
        budget_opt = cmd->add_option("--budget", budget, "compression token budget");
        workers_opt = cmd->add_option("--workers", workers, "episode-level parallelism");
        levels_opt = cmd->add_option("--levels", levels, "SID levels (remote backends)");
        codes_opt = cmd->add_option("--codes", codes, "codes per level (remote backends)");
        cmd->add_option("--policy", policy, "candidate policy: union or expert")
            ->check(CLI::IsMember({"union", "expert"}));
    }

    void layer(const ConfigLayer& file) {
        if (backend_opt) file.apply(backend_opt, "backend", backend_spec);
        file.apply(alpha_opt, "alpha", alpha);
        file.apply(epsilon_opt, "epsilon", epsilon);
        file.apply(beams_opt, "beams", beams);
        file.apply(returns_opt, "returns", returns);
        file.apply(budget_opt, "budget", budget);
        file.apply(workers_opt, "workers", workers);
        file.apply(levels_opt, "levels", levels);
        file.apply(codes_opt, "codes", codes);
    }

    sidalign::ExperimentConfig experiment_config() const {
        sidalign::ExperimentConfig cfg;
        cfg.align.alpha = alpha;
        cfg.align.epsilon = epsilon;
        cfg.align.num_beams = beams;
        cfg.align.num_return = returns;
        cfg.align.candidate_policy = policy == "expert"
                                         ? sidalign::CandidatePolicy::ExpertBeam
                                         : sidalign::CandidatePolicy::UnionExpertBaseline;
        cfg.compressor = sidalign::CompressorConfig::defaults();
        cfg.compressor.budget = budget;
        cfg.workers = workers;
        return cfg;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Inference-time subspace alignment for semantic-ID recommenders"};
    app.require_subcommand(1);

    // synth ------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a seeded synthetic dataset");
    sidalign::SyntheticModelConfig synth_cfg;
    std::size_t synth_episodes = 1000;
    std::string synth_style = "verbose";
    std::string synth_out;
    std::optional<std::string> synth_model_out;
    synth->add_option("--items-levels,--levels", synth_cfg.levels, "SID levels");
    synth->add_option("--codes", synth_cfg.codes_per_level, "codes per level");
    synth->add_option("--clusters", synth_cfg.k_clusters, "preference clusters");
    synth->add_option("--gamma", synth_cfg.gamma, "drift strength in [0,1]");
    synth->add_option("--n-general", synth_cfg.n_general, "general vocabulary size");
    synth->add_option("--zipf", synth_cfg.zipf_s, "popularity exponent");
    synth->add_option("--lambda-sid", synth_cfg.lambda_sid, "SID weighting in the dilution ratio");
    synth->add_option("--kappa", synth_cfg.kappa, "attention salience gain");
    synth->add_option("--tau", synth_cfg.tau, "cluster sharpness temperature");
    synth->add_option("--seed", synth_cfg.seed, "model and dataset seed");
    synth->add_option("--episodes", synth_episodes, "episode count");
    synth->add_option("--cot-style", synth_style, "none, short or verbose")
        ->check(CLI::IsMember({"none", "short", "verbose"}));
    synth->add_option("--out", synth_out, "dataset JSONL path")->required();
    synth->add_option("--model-out", synth_model_out, "write the model config JSON here");
    synth->callback([&] {
        sidalign::SyntheticBackend backend(synth_cfg);
        const auto episodes = sidalign::synth_dataset(
            backend, synth_episodes, sidalign::cot_style_from_string(synth_style), synth_cfg.seed);
        sidalign::write_dataset_jsonl(synth_out, episodes, backend.vocabulary());
        if (synth_model_out) write_file(*synth_model_out, synth_cfg.to_json_string() + "\n");
    });

    // rerank -----------------------------------------------------------
    auto* rerank_cmd = app.add_subcommand("rerank", "three-context contrastive reranking");
    CommonOpts rerank_opts;
    std::string rerank_data;
    std::optional<std::string> rerank_out;
    rerank_cmd->add_option("--data", rerank_data, "dataset JSONL")->required();
    rerank_cmd->add_option("--out", rerank_out, "rankings JSONL (stdout when omitted)");
    rerank_opts.attach(rerank_cmd);
    rerank_cmd->callback([&] {
        ConfigLayer file(rerank_opts.config_path);
        rerank_opts.layer(file);
        BackendHandle h =
            make_backend(rerank_opts.backend_spec, rerank_opts.levels, rerank_opts.codes);
        const sidalign::Vocabulary vocab =
            h.synth ? h.synth->vocabulary() : sidalign::Vocabulary(h.levels, h.codes, {});
        const auto episodes = sidalign::load_dataset(rerank_data, vocab);
        const auto cfg = rerank_opts.experiment_config();
        emit(rerank_out,
             sidalign::rerank_dataset_jsonl(*h.backend, episodes, cfg, h.levels, h.codes));
    });

    // eval ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "think-off / think-on / aligned comparison");
    CommonOpts eval_opts;
    std::optional<std::string> eval_data;
    std::optional<std::string> eval_out;
    std::string eval_alpha_grid;
    std::string eval_k = "1,5,10";
    std::size_t eval_synth_episodes = 0;
    std::string eval_synth_style = "verbose";
    std::uint64_t eval_synth_seed = 0;
    eval_cmd->add_option("--data", eval_data, "dataset JSONL");
    eval_cmd->add_option("--synth-episodes", eval_synth_episodes,
                         "generate this many episodes instead of --data (synth backends)");
    eval_cmd->add_option("--cot-style", eval_synth_style, "style for --synth-episodes")
        ->check(CLI::IsMember({"none", "short", "verbose"}));
    eval_cmd->add_option("--synth-seed", eval_synth_seed, "seed for --synth-episodes");
    eval_cmd->add_option("--alpha-grid", eval_alpha_grid, "comma-separated alphas");
    eval_cmd->add_option("--k", eval_k, "comma-separated cutoffs");
    eval_cmd->add_option("--out", eval_out, "report CSV (stdout when omitted)");
    eval_opts.attach(eval_cmd);
    eval_cmd->callback([&] {
        ConfigLayer file(eval_opts.config_path);
        eval_opts.layer(file);
        BackendHandle h = make_backend(eval_opts.backend_spec, eval_opts.levels, eval_opts.codes);
        std::vector<sidalign::EpisodeRecord> episodes;
        if (eval_data) {
            const sidalign::Vocabulary vocab =
                h.synth ? h.synth->vocabulary() : sidalign::Vocabulary(h.levels, h.codes, {});
            episodes = sidalign::load_dataset(*eval_data, vocab);
        } else if (eval_synth_episodes > 0) {
            if (!h.synth) throw InvalidConfig("--synth-episodes requires a synth backend");
            episodes = sidalign::synth_dataset(*h.synth, eval_synth_episodes,
                                               sidalign::cot_style_from_string(eval_synth_style),
                                               eval_synth_seed);
        } else {
            throw InvalidConfig("eval needs --data or --synth-episodes");
        }
        auto cfg = eval_opts.experiment_config();
        cfg.k_list = parse_int_list(eval_k);
        if (!eval_alpha_grid.empty()) cfg.alpha_grid = parse_double_list(eval_alpha_grid);
        const auto table =
            sidalign::run_experiment(*h.backend, episodes, cfg, h.levels, h.codes);
        emit(eval_out, sidalign::report_to_csv(table));
    });

    // diagnose -----------------------------------------------------------
    auto* diag_cmd = app.add_subcommand("diagnose", "SDI/AEI attention metrics and PCA projections");
    CommonOpts diag_opts;
    std::string diag_data;
    std::optional<std::string> diag_out;
    std::optional<std::string> diag_proj_out;
    diag_cmd->add_option("--data", diag_data, "dataset JSONL")->required();
    diag_cmd->add_option("--out", diag_out, "metrics CSV (stdout when omitted)");
    diag_cmd->add_option("--projections-out", diag_proj_out, "token projections CSV");
    diag_opts.attach(diag_cmd);
    diag_cmd->callback([&] {
        ConfigLayer file(diag_opts.config_path);
        diag_opts.layer(file);
        BackendHandle h = make_backend(diag_opts.backend_spec, diag_opts.levels, diag_opts.codes);
        if (!h.synth) throw InvalidConfig("diagnose requires a synthetic backend");
        const auto episodes = sidalign::load_dataset(diag_data, h.synth->vocabulary());
        emit(diag_out, sidalign::diagnostics_csv(*h.backend, episodes, h.levels, h.codes));
        if (diag_proj_out) write_file(*diag_proj_out, sidalign::projections_csv(*h.synth));
    });

    // compress -----------------------------------------------------------
    auto* comp_cmd = app.add_subcommand("compress", "reasoning-chain compression, one CoT per line");
    std::string comp_in;
    std::optional<std::string> comp_out;
    std::optional<std::string> comp_endpoint;
    int comp_budget = 32;
    comp_cmd->add_option("--in", comp_in, "input file, one CoT per line")->required();
    comp_cmd->add_option("--out", comp_out, "output file (stdout when omitted)");
    comp_cmd->add_option("--budget", comp_budget, "token budget");
    comp_cmd->add_option("--endpoint", comp_endpoint, "remote compressor base URL");
    comp_cmd->callback([&] {
        auto cfg = sidalign::CompressorConfig::defaults();
        cfg.budget = comp_budget;
        std::istringstream in(read_file(comp_in));
        std::string line, out;
        while (std::getline(in, line)) {
            out += comp_endpoint ? sidalign::compress_remote(line, *comp_endpoint, cfg)
                                 : sidalign::compress_rule_based(line, cfg);
            out += '\n';
        }
        emit(comp_out, out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints usage, exits 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sidalign::DatasetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sidalign::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
