#include "harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "errors.hpp"
#include "roster.hpp"

namespace pinchfl {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string hex16(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::string path_join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::string read_text_file(const std::string& path, const char* needed_by) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DependencyError("missing artifact " + path + "; run the " +
                              std::string(needed_by) + " subcommand first");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Merge this stage's entry into manifest.json; rewrites are deterministic
// (sorted keys, no timestamps) so reruns stay byte-identical.
void update_manifest(const ExperimentConfig& cfg, const std::string& out_dir,
                     const std::string& stage, const json& stage_seeds,
                     const std::vector<std::string>& artifacts) {
    std::string path = path_join(out_dir, "manifest.json");
    json root;
    {
        std::ifstream in(path, std::ios::binary);
        if (in) {
            std::ostringstream buf;
            buf << in.rdbuf();
            json existing = json::parse(buf.str(), nullptr, false);
            if (!existing.is_discarded() && existing.is_object()) root = existing;
        }
    }
    root["version"] = kVersion;
    root["config_hash"] = hex16(cfg.hash());
    root["master_seed"] = cfg.master_seed;
    std::vector<std::string> sorted = artifacts;
    std::sort(sorted.begin(), sorted.end());
    root["stages"][stage] = {{"seeds", stage_seeds}, {"artifacts", sorted}};
    write_file(path, root.dump(2) + "\n");
}

void write_config_snapshot(const ExperimentConfig& cfg, const std::string& out_dir) {
    write_file(path_join(out_dir, "config.json"), cfg.to_json_text() + "\n");
}

json decision_to_json(const RoundDecision& d) {
    return json{{"x_p", d.x_p}, {"powers", d.powers}, {"freqs", d.freqs}};
}

RoundDecision decision_from_json(const json& j) {
    RoundDecision d;
    d.x_p = j.at("x_p").get<double>();
    d.powers = j.at("powers").get<std::vector<double>>();
    d.freqs = j.at("freqs").get<std::vector<double>>();
    return d;
}

struct ClassifyArtifacts {
    std::vector<ClientProfile> roster;
    std::vector<double> gains;
    std::vector<std::uint32_t> conventional;
    std::vector<std::uint32_t> pinching;
};

ClassifyArtifacts load_classify_artifacts(const std::string& out_dir) {
    ClassifyArtifacts art;
    art.roster = roster_from_csv_text(read_text_file(path_join(out_dir, "roster.csv"), "classify"));
    json sel = json::parse(read_text_file(path_join(out_dir, "selection.json"), "classify"),
                           nullptr, false);
    if (sel.is_discarded() || !sel.is_object())
        throw DependencyError("selection.json is not valid; rerun the classify subcommand");
    try {
        art.gains = sel.at("gains").get<std::vector<double>>();
        art.conventional = sel.at("conventional").get<std::vector<std::uint32_t>>();
        art.pinching = sel.at("pinching").get<std::vector<std::uint32_t>>();
    } catch (const json::exception&) {
        throw DependencyError("selection.json is not valid; rerun the classify subcommand");
    }
    if (art.gains.size() != art.roster.size())
        throw DependencyError("selection.json does not match roster.csv; rerun classify");
    return art;
}

const ClientProfile& find_client(const std::vector<ClientProfile>& roster, std::uint32_t id) {
    for (const auto& c : roster)
        if (c.id == id) return c;
    throw DependencyError("selected client id " + format_u64(id) + " missing from roster");
}

double find_gain(const std::vector<ClientProfile>& roster, const std::vector<double>& gains,
                 std::uint32_t id) {
    for (std::size_t i = 0; i < roster.size(); ++i)
        if (roster[i].id == id) return gains[i];
    throw DependencyError("selected client id " + format_u64(id) + " missing from roster");
}

// Solve the scheme's resource allocation with the configured solver and
// return (decision, round latency).
std::pair<RoundDecision, double> solve_allocation(const ExperimentConfig& cfg,
                                                  const SchemeSetup& setup, unsigned threads,
                                                  const std::string& seed_label) {
    if (cfg.fl_solver == "oracle") {
        SearchSpec spec = cfg.search_spec(threads);
        if (!setup.has_xp) spec.fixed_xp = setup.fixed_xp;
        OracleResult res = grid_search(setup.instance, spec);
        return {res.best, res.best_t};
    }
    RoundEnv env(setup.instance, cfg.hyper.xi1, cfg.hyper.xi2, cfg.hyper.t_cap,
                 cfg.hyper.episode_length, cfg.fading,
                 derive_seed(cfg.master_seed, "env-" + seed_label));
    ActionSpace space = env.action_space(cfg.hyper.f_floor_frac);
    space.has_xp = setup.has_xp && setup.instance.pinching_enabled;
    space.fixed_xp = setup.fixed_xp;
    DdpgAgent agent(env.state_dim(), space, cfg.hyper,
                    derive_seed(cfg.master_seed, "ddpg-" + seed_label));
    TrainResult result = train_ddpg(env, agent, cfg.hyper);
    return {result.best_decision, result.best_t};
}

void run_classify(const ExperimentConfig& cfg, const std::string& out_dir) {
    Population pop = generate_population(cfg);
    SelectionResult sel = classify_and_select(pop.clients, pop.gains, cfg.conventional,
                                              cfg.select, cfg.fuzzy_params());

    save_roster(path_join(out_dir, "roster.csv"), pop.clients);
    write_file(path_join(out_dir, "classification.csv"), classification_csv(sel));
    json selj;
    selj["conventional"] = sel.conventional;
    selj["pinching"] = sel.pinching;
    selj["discarded"] = sel.discarded;
    selj["gains"] = pop.gains;
    write_file(path_join(out_dir, "selection.json"), selj.dump(2) + "\n");

    json seeds{{"population", derive_seed(cfg.master_seed, "population")}};
    if (cfg.fading) seeds["fading"] = derive_seed(cfg.master_seed, "fading");
    update_manifest(cfg, out_dir, "classify", seeds,
                    {"roster.csv", "classification.csv", "selection.json"});
}

void run_solve(const ExperimentConfig& cfg, const std::string& out_dir) {
    ClassifyArtifacts art = load_classify_artifacts(out_dir);
    RoundInstance base =
        build_instance(cfg, art.roster, art.gains, art.conventional, art.pinching);
    SchemeSetup setup = make_scheme_instance(base, cfg.scheme_kind(), cfg.resolved_fixed_xp());

    RoundEnv env(setup.instance, cfg.hyper.xi1, cfg.hyper.xi2, cfg.hyper.t_cap,
                 cfg.hyper.episode_length, cfg.fading, derive_seed(cfg.master_seed, "env"));
    ActionSpace space = env.action_space(cfg.hyper.f_floor_frac);
    space.has_xp = setup.has_xp && setup.instance.pinching_enabled;
    space.fixed_xp = setup.fixed_xp;
    DdpgAgent agent(env.state_dim(), space, cfg.hyper, derive_seed(cfg.master_seed, "ddpg"));
    TrainResult result = train_ddpg(env, agent, cfg.hyper);

    write_file(path_join(out_dir, "rewards.csv"), rewards_csv(result.history));
    write_file(path_join(out_dir, "checkpoint.json"),
               agent.checkpoint_json(cfg.master_seed) + "\n");
    json dec;
    dec["scheme"] = cfg.scheme;
    dec["decision"] = decision_to_json(result.best_decision);
    dec["best_t"] = result.best_t;
    dec["feasible"] = result.best_feasible;
    dec["steps"] = result.steps;
    write_file(path_join(out_dir, "decision.json"), dec.dump(2) + "\n");

    json seeds{{"env", derive_seed(cfg.master_seed, "env")},
               {"ddpg", derive_seed(cfg.master_seed, "ddpg")}};
    update_manifest(cfg, out_dir, "solve", seeds,
                    {"rewards.csv", "checkpoint.json", "decision.json"});
}

void run_oracle(const ExperimentConfig& cfg, const std::string& out_dir, unsigned threads) {
    ClassifyArtifacts art = load_classify_artifacts(out_dir);
    RoundInstance base =
        build_instance(cfg, art.roster, art.gains, art.conventional, art.pinching);
    SchemeSetup setup = make_scheme_instance(base, cfg.scheme_kind(), cfg.resolved_fixed_xp());
    SearchSpec spec = cfg.search_spec(threads);
    if (!setup.has_xp) spec.fixed_xp = setup.fixed_xp;

    OracleResult res = grid_search(setup.instance, spec);
    json j;
    j["scheme"] = cfg.scheme;
    j["instance_hash"] = hex16(res.instance_hash);
    j["best"] = decision_to_json(res.best);
    j["best_t"] = res.best_t;
    j["feasible"] = res.feasible;
    j["excess"] = res.excess;
    j["grid_points"] = res.grid_points;
    j["evaluations"] = res.evaluations;
    write_file(path_join(out_dir, "oracle.json"), j.dump(2) + "\n");

    update_manifest(cfg, out_dir, "oracle", json::object(), {"oracle.json"});
}

// The FL data realization: synthetic task, label-skewed partition over all M
// clients, profiles re-sized to their partition share so data volume and
// latency bookkeeping agree.
struct FlData {
    SyntheticTask task;
    std::vector<LocalDataset> datasets;   // aligned with roster order
    LocalDataset eval_set;
    std::vector<ClientProfile> profiles;  // roster with D_n from the partition
};

FlData make_fl_data(const ExperimentConfig& cfg, const std::vector<ClientProfile>& roster) {
    FlData data;
    data.task = SyntheticTask::make(cfg.classes, cfg.features, cfg.mean_scale, cfg.task_noise,
                                    derive_seed(cfg.master_seed, "task"));
    data.datasets = partition_noniid(data.task, cfg.total_samples, roster.size(), cfg.alpha_skew,
                                     derive_seed(cfg.master_seed, "partition"));
    data.eval_set =
        make_eval_set(data.task, cfg.test_samples, derive_seed(cfg.master_seed, "eval"));
    data.profiles = roster;
    for (std::size_t i = 0; i < data.profiles.size(); ++i)
        data.profiles[i].samples = static_cast<double>(data.datasets[i].count);
    return data;
}

std::vector<FlRoundLog> run_fl_scheme(const ExperimentConfig& cfg, const FlData& data,
                                      const ClassifyArtifacts& art, const std::string& scheme,
                                      unsigned threads) {
    ExperimentConfig scheme_cfg = cfg;
    scheme_cfg.scheme = scheme;
    RoundInstance base =
        build_instance(scheme_cfg, data.profiles, art.gains, art.conventional, art.pinching);
    SchemeSetup setup =
        make_scheme_instance(base, scheme_cfg.scheme_kind(), scheme_cfg.resolved_fixed_xp());
    auto [decision, latency] = solve_allocation(scheme_cfg, setup, threads, scheme);

    // Participant datasets in instance order (conventional then element-served).
    std::vector<LocalDataset> participant_data;
    auto dataset_of = [&](std::uint32_t id) -> const LocalDataset& {
        for (std::size_t i = 0; i < data.profiles.size(); ++i)
            if (data.profiles[i].id == id) return data.datasets[i];
        throw DependencyError("selected client id " + format_u64(id) + " missing from roster");
    };
    for (std::uint32_t id : art.conventional) participant_data.push_back(dataset_of(id));
    for (std::uint32_t id : art.pinching) participant_data.push_back(dataset_of(id));

    FlRunSpec spec;
    spec.rounds = cfg.fl_rounds;
    spec.budget_s = cfg.budget_s;
    spec.lr = cfg.fl_lr;
    spec.scheme = scheme;
    return run_fl(spec, latency, participant_data, data.eval_set, cfg.classes, cfg.features,
                  cfg.master_seed);
}

void run_fl_subcommand(const ExperimentConfig& cfg, const std::string& out_dir,
                       unsigned threads) {
    ClassifyArtifacts art = load_classify_artifacts(out_dir);
    FlData data = make_fl_data(cfg, art.roster);
    std::vector<FlRoundLog> logs = run_fl_scheme(cfg, data, art, cfg.scheme, threads);
    write_file(path_join(out_dir, "fl_log.csv"), fl_log_csv(logs));

    json seeds{{"task", derive_seed(cfg.master_seed, "task")},
               {"partition", derive_seed(cfg.master_seed, "partition")},
               {"eval", derive_seed(cfg.master_seed, "eval")}};
    update_manifest(cfg, out_dir, "run-fl", seeds, {"fl_log.csv"});
}

void run_compare(const ExperimentConfig& cfg, const std::string& out_dir, unsigned threads) {
    ClassifyArtifacts art = load_classify_artifacts(out_dir);
    FlData data = make_fl_data(cfg, art.roster);

    static const char* kSchemes[] = {"optimized", "fixed", "wopa"};

    std::string rewards_text;
    {
        CsvWriter w;
        w.header({"episode", "mean_reward", "best_T", "energy_violations", "scheme"});
        rewards_text = w.str();
    }
    std::string fl_text;
    {
        CsvWriter w;
        w.header({"round", "wall_clock_s", "round_T_s", "accuracy", "max_accuracy", "scheme",
                  "seed"});
        fl_text = w.str();
    }

    json summary;
    json seeds = json::object();
    for (const char* scheme : kSchemes) {
        ExperimentConfig scheme_cfg = cfg;
        scheme_cfg.scheme = scheme;
        RoundInstance base =
            build_instance(scheme_cfg, data.profiles, art.gains, art.conventional, art.pinching);
        SchemeSetup setup = make_scheme_instance(base, scheme_cfg.scheme_kind(),
                                                 scheme_cfg.resolved_fixed_xp());

        // Independent training per scheme: fresh env, fresh agent, fresh seeds.
        std::uint64_t env_seed = derive_seed(cfg.master_seed, std::string("env-") + scheme);
        std::uint64_t ddpg_seed = derive_seed(cfg.master_seed, std::string("ddpg-") + scheme);
        seeds[std::string("env-") + scheme] = env_seed;
        seeds[std::string("ddpg-") + scheme] = ddpg_seed;
        RoundEnv env(setup.instance, cfg.hyper.xi1, cfg.hyper.xi2, cfg.hyper.t_cap,
                     cfg.hyper.episode_length, cfg.fading, env_seed);
        ActionSpace space = env.action_space(cfg.hyper.f_floor_frac);
        space.has_xp = setup.has_xp && setup.instance.pinching_enabled;
        space.fixed_xp = setup.fixed_xp;
        DdpgAgent agent(env.state_dim(), space, cfg.hyper, ddpg_seed);
        TrainResult result = train_ddpg(env, agent, cfg.hyper);

        for (const auto& e : result.history) {
            rewards_text += format_u64(e.episode);
            rewards_text += ',';
            rewards_text += format_double(e.mean_reward);
            rewards_text += ',';
            rewards_text += format_double(e.best_t);
            rewards_text += ',';
            rewards_text += format_u64(e.energy_violations);
            rewards_text += ',';
            rewards_text += scheme;
            rewards_text += '\n';
        }

        std::size_t episodes = result.history.size();
        std::size_t window = std::min<std::size_t>(episodes, 500);
        double converged = 0.0;
        for (std::size_t i = episodes - window; i < episodes; ++i)
            converged += result.history[i].mean_reward;
        if (window > 0) converged /= static_cast<double>(window);

        std::vector<FlRoundLog> logs = run_fl_scheme(cfg, data, art, scheme, threads);
        for (const auto& l : logs) {
            fl_text += format_u64(l.round);
            fl_text += ',';
            fl_text += format_double(l.wall_clock_s);
            fl_text += ',';
            fl_text += format_double(l.round_t_s);
            fl_text += ',';
            fl_text += format_double(l.accuracy);
            fl_text += ',';
            fl_text += format_double(l.max_accuracy);
            fl_text += ',';
            fl_text += l.scheme;
            fl_text += ',';
            fl_text += format_u64(l.seed);
            fl_text += '\n';
        }

        summary[scheme] = {{"converged_reward", converged},
                           {"converged_window", window},
                           {"best_t", result.best_t},
                           {"best_feasible", result.best_feasible},
                           {"fl_rounds", logs.size()},
                           {"fl_final_max_accuracy",
                            logs.empty() ? 0.0 : logs.back().max_accuracy}};
    }

    summary["ordering"] = {
        {"optimized_ge_fixed", summary["optimized"]["converged_reward"].get<double>() >=
                                   summary["fixed"]["converged_reward"].get<double>()},
        {"fixed_ge_wopa", summary["fixed"]["converged_reward"].get<double>() >=
                              summary["wopa"]["converged_reward"].get<double>()},
        {"optimized_gt_wopa", summary["optimized"]["converged_reward"].get<double>() >
                                  summary["wopa"]["converged_reward"].get<double>()}};

    write_file(path_join(out_dir, "compare_rewards.csv"), rewards_text);
    write_file(path_join(out_dir, "compare_fl.csv"), fl_text);
    write_file(path_join(out_dir, "compare_summary.json"), summary.dump(2) + "\n");

    seeds["task"] = derive_seed(cfg.master_seed, "task");
    seeds["partition"] = derive_seed(cfg.master_seed, "partition");
    seeds["eval"] = derive_seed(cfg.master_seed, "eval");
    update_manifest(cfg, out_dir, "compare", seeds,
                    {"compare_rewards.csv", "compare_fl.csv", "compare_summary.json"});
}

} // namespace

Population generate_population(const ExperimentConfig& cfg) {
    Population pop;
    Rng rng(derive_seed(cfg.master_seed, "population"));
    pop.clients = place_clients(cfg.geometry, cfg.client_defaults(), cfg.count, rng);
    pop.gains.resize(pop.clients.size());
    for (std::size_t i = 0; i < pop.clients.size(); ++i)
        pop.gains[i] = conventional_gain(cfg.geometry, pop.clients[i].position());
    if (cfg.fading) {
        Rng fade(derive_seed(cfg.master_seed, "fading"));
        for (double& g : pop.gains) g *= fade.exponential();
    }
    return pop;
}

RoundInstance build_instance(const ExperimentConfig& cfg,
                             const std::vector<ClientProfile>& roster,
                             const std::vector<double>& gains,
                             const std::vector<std::uint32_t>& conventional_ids,
                             const std::vector<std::uint32_t>& pinching_ids) {
    if (conventional_ids.size() + pinching_ids.size() == 0)
        throw DependencyError("selection is empty; rerun the classify subcommand");
    RoundInstance inst;
    inst.geo = cfg.geometry;
    inst.num_conventional = conventional_ids.size();
    inst.pinching_enabled = true;
    inst.tau_half = cfg.tau_half;
    for (std::uint32_t id : conventional_ids) {
        inst.clients.push_back(find_client(roster, id));
        inst.conv_gain.push_back(find_gain(roster, gains, id));
    }
    for (std::uint32_t id : pinching_ids) {
        inst.clients.push_back(find_client(roster, id));
        inst.conv_gain.push_back(find_gain(roster, gains, id));
    }
    inst.validate();
    return inst;
}

std::string classification_csv(const SelectionResult& sel) {
    CsvWriter w;
    w.header({"id", "CQ_norm", "DC_norm", "NO*", "category", "selected"});
    for (const auto& o : sel.outcomes) {
        w.row({format_u64(o.id), format_double(o.cq_norm), format_double(o.dc_norm),
               format_double(o.no_star), category_name(o.category), o.selected ? "1" : "0"});
    }
    return w.str();
}

std::string rewards_csv(const std::vector<EpisodeStat>& history) {
    CsvWriter w;
    w.header({"episode", "mean_reward", "best_T", "energy_violations"});
    for (const auto& e : history)
        w.row({format_u64(e.episode), format_double(e.mean_reward), format_double(e.best_t),
               format_u64(e.energy_violations)});
    return w.str();
}

std::string fl_log_csv(const std::vector<FlRoundLog>& logs) {
    CsvWriter w;
    w.header({"round", "wall_clock_s", "round_T_s", "accuracy", "max_accuracy", "scheme",
              "seed"});
    for (const auto& l : logs)
        w.row({format_u64(l.round), format_double(l.wall_clock_s), format_double(l.round_t_s),
               format_double(l.accuracy), format_double(l.max_accuracy), l.scheme,
               format_u64(l.seed)});
    return w.str();
}

std::string decision_json_text(const RoundDecision& d) {
    return decision_to_json(d).dump(2) + "\n";
}

RoundDecision decision_from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("decision text is not a JSON object");
    try {
        return decision_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed decision object: ") + e.what());
    }
}

void run_subcommand(const std::string& name, const ExperimentConfig& cfg,
                    const std::string& out_dir, unsigned threads) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    write_config_snapshot(cfg, out_dir);
    if (name == "classify") run_classify(cfg, out_dir);
    else if (name == "solve" || name == "train-ddpg") run_solve(cfg, out_dir);
    else if (name == "oracle") run_oracle(cfg, out_dir, threads);
    else if (name == "run-fl") run_fl_subcommand(cfg, out_dir, threads);
    else if (name == "compare") run_compare(cfg, out_dir, threads);
    else
        throw ConfigError("unknown subcommand '" + name +
                          "'; expected classify, solve, train-ddpg, oracle, run-fl, or compare");
}

} // namespace pinchfl
