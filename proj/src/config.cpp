#include "config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace pinchfl {

namespace {

using nlohmann::json;

double want_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + " must be a number");
    return v.get<double>();
}

std::size_t want_index(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError(path + " must be a nonnegative integer");
    return v.get<std::size_t>();
}

std::uint64_t want_u64(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError(path + " must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

bool want_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ConfigError(path + " must be a boolean");
    return v.get<bool>();
}

std::string want_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path + " must be a string");
    return v.get<std::string>();
}

std::vector<double> want_breakpoints(const json& v, const std::string& path) {
    if (!v.is_array() || (v.size() != 3 && v.size() != 4))
        throw ConfigError(path + " must be an array of 3 (triangle) or 4 (trapezoid) numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(want_number(e, path));
    return out;
}

MembershipFunction membership_from(const std::vector<double>& bp, const std::string& label) {
    if (bp.size() == 3) return MembershipFunction::tri(bp[0], bp[1], bp[2], label);
    if (bp.size() == 4) return MembershipFunction::trap(bp[0], bp[1], bp[2], bp[3], label);
    throw ConfigError("membership '" + label + "' needs 3 or 4 breakpoints");
}

void parse_geometry(ExperimentConfig& c, const json& block) {
    for (const auto& [key, v] : block.items()) {
        std::string path = "geometry." + key;
        if (key == "length") c.geometry.length = want_number(v, path);
        else if (key == "width") c.geometry.width = want_number(v, path);
        else if (key == "waveguide_height") c.geometry.waveguide_height = want_number(v, path);
        else if (key == "carrier_hz") c.geometry.carrier_hz = want_number(v, path);
        else if (key == "bandwidth_hz") c.geometry.bandwidth_hz = want_number(v, path);
        else if (key == "noise_psd_dbm") c.geometry.noise_psd_dbm = want_number(v, path);
        else if (key == "pathloss_exp") c.geometry.pathloss_exp = want_number(v, path);
        else throw ConfigError("unknown key " + path);
    }
}

void parse_population(ExperimentConfig& c, const json& block) {
    for (const auto& [key, v] : block.items()) {
        std::string path = "population." + key;
        if (key == "count") c.count = want_index(v, path);
        else if (key == "select") c.select = want_index(v, path);
        else if (key == "conventional") c.conventional = want_index(v, path);
        else if (key == "fading") c.fading = want_bool(v, path);
        else if (key == "cycles") c.defaults.cycles = want_number(v, path);
        else if (key == "f_max") c.defaults.f_max = want_number(v, path);
        else if (key == "p_max") c.defaults.p_max = want_number(v, path);
        else if (key == "e_max") c.defaults.e_max = want_number(v, path);
        else if (key == "upload_bits") c.defaults.upload_bits = want_number(v, path);
        else if (key == "samples_min") c.defaults.samples_min = want_number(v, path);
        else if (key == "samples_max") c.defaults.samples_max = want_number(v, path);
        else if (key == "tau_half") c.tau_half = want_number(v, path);
        else throw ConfigError("unknown key " + path);
    }
}

void parse_fuzzy(ExperimentConfig& c, const json& block) {
    for (const auto& [key, v] : block.items()) {
        std::string path = "fuzzy." + key;
        if (key == "cq_weak") c.cq_weak = want_breakpoints(v, path);
        else if (key == "cq_medium") c.cq_medium = want_breakpoints(v, path);
        else if (key == "cq_strong") c.cq_strong = want_breakpoints(v, path);
        else if (key == "dc_low") c.dc_low = want_breakpoints(v, path);
        else if (key == "dc_moderate") c.dc_moderate = want_breakpoints(v, path);
        else if (key == "dc_high") c.dc_high = want_breakpoints(v, path);
        else if (key == "out_discarded") c.out_discarded = want_breakpoints(v, path);
        else if (key == "out_conventional") c.out_conventional = want_breakpoints(v, path);
        else if (key == "out_pinching") c.out_pinching = want_breakpoints(v, path);
        else if (key == "dc_scale") c.dc_scale = want_number(v, path);
        else if (key == "dc_coeff") c.dc_coeff = want_number(v, path);
        else if (key == "dc_rate") c.dc_rate = want_number(v, path);
        else if (key == "cog_grid") c.cog_grid = static_cast<int>(want_index(v, path));
        else throw ConfigError("unknown key " + path);
    }
}

void parse_solver(ExperimentConfig& c, const json& block) {
    for (const auto& [key, v] : block.items()) {
        std::string path = "solver." + key;
        if (key == "discount") c.hyper.discount = want_number(v, path);
        else if (key == "soft_update") c.hyper.soft_update_rate = want_number(v, path);
        else if (key == "batch") c.hyper.batch = want_index(v, path);
        else if (key == "buffer") c.hyper.buffer_capacity = want_index(v, path);
        else if (key == "actor_lr") c.hyper.actor_lr = want_number(v, path);
        else if (key == "critic_lr") c.hyper.critic_lr = want_number(v, path);
        else if (key == "noise_start") c.hyper.noise_start = want_number(v, path);
        else if (key == "noise_end") c.hyper.noise_end = want_number(v, path);
        else if (key == "xi1") c.hyper.xi1 = want_number(v, path);
        else if (key == "xi2") c.hyper.xi2 = want_number(v, path);
        else if (key == "t_cap") c.hyper.t_cap = want_number(v, path);
        else if (key == "episode_length") c.hyper.episode_length = want_index(v, path);
        else if (key == "total_steps") c.hyper.total_steps = want_index(v, path);
        else if (key == "warmup_steps") c.hyper.warmup_steps = want_index(v, path);
        else if (key == "hidden") c.hyper.hidden = want_index(v, path);
        else if (key == "f_floor_frac") c.hyper.f_floor_frac = want_number(v, path);
        else if (key == "divergence_cap") c.hyper.divergence_cap = want_number(v, path);
        else if (key == "grid_xp") c.grid_xp = want_index(v, path);
        else if (key == "grid_power") c.grid_power = want_index(v, path);
        else if (key == "grid_freq") c.grid_freq = want_index(v, path);
        else if (key == "full_grid") c.full_grid = want_bool(v, path);
        else if (key == "feasibility") c.feasibility = want_string(v, path);
        else if (key == "penalty_weight") c.penalty_weight = want_number(v, path);
        else if (key == "eval_cap") c.eval_cap = want_u64(v, path);
        else if (key == "fixed_xp") c.fixed_xp = want_number(v, path);
        else throw ConfigError("unknown key " + path);
    }
}

void parse_fl(ExperimentConfig& c, const json& block) {
    for (const auto& [key, v] : block.items()) {
        std::string path = "fl." + key;
        if (key == "rounds") c.fl_rounds = want_index(v, path);
        else if (key == "lr") c.fl_lr = want_number(v, path);
        else if (key == "alpha_skew") c.alpha_skew = want_number(v, path);
        else if (key == "total_samples") c.total_samples = want_index(v, path);
        else if (key == "classes") c.classes = want_index(v, path);
        else if (key == "features") c.features = want_index(v, path);
        else if (key == "mean_scale") c.mean_scale = want_number(v, path);
        else if (key == "noise") c.task_noise = want_number(v, path);
        else if (key == "test_samples") c.test_samples = want_index(v, path);
        else if (key == "budget_s") c.budget_s = want_number(v, path);
        else if (key == "scheme") c.scheme = want_string(v, path);
        else if (key == "solver") c.fl_solver = want_string(v, path);
        else throw ConfigError("unknown key " + path);
    }
}

void parse_seeds(ExperimentConfig& c, const json& block) {
    for (const auto& [key, v] : block.items()) {
        std::string path = "seeds." + key;
        if (key == "master") c.master_seed = want_u64(v, path);
        else throw ConfigError("unknown key " + path);
    }
}

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded()) throw ConfigError("config is not valid JSON");
    if (!root.is_object()) throw ConfigError("config root must be an object");
    ExperimentConfig c;
    for (const auto& [block, v] : root.items()) {
        if (!v.is_object()) throw ConfigError("config block '" + block + "' must be an object");
        if (block == "geometry") parse_geometry(c, v);
        else if (block == "population") parse_population(c, v);
        else if (block == "fuzzy") parse_fuzzy(c, v);
        else if (block == "solver") parse_solver(c, v);
        else if (block == "fl") parse_fl(c, v);
        else if (block == "seeds") parse_seeds(c, v);
        else throw ConfigError("unknown config block '" + block + "'");
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
    json root;
    root["geometry"] = {{"length", geometry.length},
                        {"width", geometry.width},
                        {"waveguide_height", geometry.waveguide_height},
                        {"carrier_hz", geometry.carrier_hz},
                        {"bandwidth_hz", geometry.bandwidth_hz},
                        {"noise_psd_dbm", geometry.noise_psd_dbm},
                        {"pathloss_exp", geometry.pathloss_exp}};
    root["population"] = {{"count", count},
                          {"select", select},
                          {"conventional", conventional},
                          {"fading", fading},
                          {"cycles", defaults.cycles},
                          {"f_max", defaults.f_max},
                          {"p_max", defaults.p_max},
                          {"e_max", defaults.e_max},
                          {"upload_bits", defaults.upload_bits},
                          {"samples_min", defaults.samples_min},
                          {"samples_max", defaults.samples_max},
                          {"tau_half", tau_half}};
    root["fuzzy"] = {{"cq_weak", cq_weak},
                     {"cq_medium", cq_medium},
                     {"cq_strong", cq_strong},
                     {"dc_low", dc_low},
                     {"dc_moderate", dc_moderate},
                     {"dc_high", dc_high},
                     {"out_discarded", out_discarded},
                     {"out_conventional", out_conventional},
                     {"out_pinching", out_pinching},
                     {"dc_scale", dc_scale},
                     {"dc_coeff", dc_coeff},
                     {"dc_rate", dc_rate},
                     {"cog_grid", cog_grid}};
    root["solver"] = {{"discount", hyper.discount},
                      {"soft_update", hyper.soft_update_rate},
                      {"batch", hyper.batch},
                      {"buffer", hyper.buffer_capacity},
                      {"actor_lr", hyper.actor_lr},
                      {"critic_lr", hyper.critic_lr},
                      {"noise_start", hyper.noise_start},
                      {"noise_end", hyper.noise_end},
                      {"xi1", hyper.xi1},
                      {"xi2", hyper.xi2},
                      {"t_cap", hyper.t_cap},
                      {"episode_length", hyper.episode_length},
                      {"total_steps", hyper.total_steps},
                      {"warmup_steps", hyper.warmup_steps},
                      {"hidden", hyper.hidden},
                      {"f_floor_frac", hyper.f_floor_frac},
                      {"divergence_cap", hyper.divergence_cap},
                      {"grid_xp", grid_xp},
                      {"grid_power", grid_power},
                      {"grid_freq", grid_freq},
                      {"full_grid", full_grid},
                      {"feasibility", feasibility},
                      {"penalty_weight", penalty_weight},
                      {"eval_cap", eval_cap},
                      {"fixed_xp", fixed_xp}};
    root["fl"] = {{"rounds", fl_rounds},
                  {"lr", fl_lr},
                  {"alpha_skew", alpha_skew},
                  {"total_samples", total_samples},
                  {"classes", classes},
                  {"features", features},
                  {"mean_scale", mean_scale},
                  {"noise", task_noise},
                  {"test_samples", test_samples},
                  {"budget_s", budget_s},
                  {"scheme", scheme},
                  {"solver", fl_solver}};
    root["seeds"] = {{"master", master_seed}};
    return root.dump(2);
}

void ExperimentConfig::apply_override(const std::string& dotted_key, const std::string& value) {
    json root = json::parse(to_json_text());
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;   // bare strings need no quotes
    // Walk the dotted path, requiring every intermediate node to exist.
    json* node = &root;
    std::size_t start = 0;
    for (;;) {
        std::size_t dot = dotted_key.find('.', start);
        std::string seg = dotted_key.substr(start, dot - start);
        if (seg.empty()) throw ConfigError("override key has an empty segment: " + dotted_key);
        if (!node->is_object() || !node->contains(seg))
            throw ConfigError("unknown override key: " + dotted_key);
        if (dot == std::string::npos) {
            (*node)[seg] = parsed;
            break;
        }
        node = &(*node)[seg];
        start = dot + 1;
    }
    *this = from_json_text(root.dump());
}

void ExperimentConfig::validate() const {
    geometry.validate();
    if (count == 0) throw ConfigError("population.count must be positive");
    if (select > count) throw ConfigError("population.select exceeds population.count");
    if (conventional > select)
        throw ConfigError("population.conventional exceeds population.select");
    if (!(defaults.cycles > 0.0)) throw ConfigError("population.cycles must be positive");
    if (!(defaults.f_max > 0.0)) throw ConfigError("population.f_max must be positive");
    if (!(defaults.p_max > 0.0)) throw ConfigError("population.p_max must be positive");
    if (!(defaults.e_max > 0.0)) throw ConfigError("population.e_max must be positive");
    if (!(defaults.upload_bits >= 0.0))
        throw ConfigError("population.upload_bits must be nonnegative");
    if (defaults.samples_min < 1.0 || defaults.samples_max < defaults.samples_min)
        throw ConfigError("population.samples range invalid");
    if (!(tau_half > 0.0)) throw ConfigError("population.tau_half must be positive");
    if (!(dc_scale > 0.0)) throw ConfigError("fuzzy.dc_scale must be positive");
    if (!(dc_coeff >= 0.0)) throw ConfigError("fuzzy.dc_coeff must be nonnegative");
    if (!(dc_rate >= 0.0)) throw ConfigError("fuzzy.dc_rate must be nonnegative");
    fuzzy_params().validate();
    hyper.validate();
    search_spec(1).validate();
    if (feasibility != "reject" && feasibility != "penalize")
        throw ConfigError("solver.feasibility must be 'reject' or 'penalize'");
    if (classes < 2) throw ConfigError("fl.classes must be at least 2");
    if (features == 0) throw ConfigError("fl.features must be positive");
    if (!(fl_lr >= 0.0)) throw ConfigError("fl.lr must be nonnegative");
    if (!(alpha_skew > 0.0)) throw ConfigError("fl.alpha_skew must be positive");
    if (total_samples < count) throw ConfigError("fl.total_samples below population.count");
    if (!(mean_scale >= 0.0)) throw ConfigError("fl.mean_scale must be nonnegative");
    if (!(task_noise > 0.0)) throw ConfigError("fl.noise must be positive");
    if (test_samples == 0) throw ConfigError("fl.test_samples must be positive");
    if (!(budget_s >= 0.0)) throw ConfigError("fl.budget_s must be nonnegative");
    if (scheme != "optimized" && scheme != "fixed" && scheme != "wopa")
        throw ConfigError("fl.scheme must be 'optimized', 'fixed', or 'wopa'");
    if (fl_solver != "oracle" && fl_solver != "ddpg")
        throw ConfigError("fl.solver must be 'oracle' or 'ddpg'");
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(to_json_text()); }

FuzzyParams ExperimentConfig::fuzzy_params() const {
    FuzzyParams p;
    p.cq = {membership_from(cq_weak, "weak"), membership_from(cq_medium, "medium"),
            membership_from(cq_strong, "strong")};
    p.dc = {membership_from(dc_low, "low"), membership_from(dc_moderate, "moderate"),
            membership_from(dc_high, "high")};
    p.out = {membership_from(out_discarded, "discarded"),
             membership_from(out_conventional, "conventional"),
             membership_from(out_pinching, "pinching")};
    p.rules = RuleTable::defaults();
    p.cog_grid = cog_grid;
    return p;
}

ClientDefaults ExperimentConfig::client_defaults() const {
    ClientDefaults d = defaults;
    d.dc_scale = dc_scale;
    d.dc_coeff = dc_coeff;
    d.dc_rate = dc_rate;
    return d;
}

SearchSpec ExperimentConfig::search_spec(unsigned threads) const {
    SearchSpec s;
    s.grid_xp = grid_xp;
    s.grid_power = grid_power;
    s.grid_freq = grid_freq;
    s.full_grid = full_grid;
    s.mode = feasibility == "penalize" ? FeasibilityMode::Penalize : FeasibilityMode::Reject;
    s.penalty_weight = penalty_weight;
    s.t_cap = hyper.t_cap;
    s.f_floor_frac = hyper.f_floor_frac;
    s.eval_cap = eval_cap;
    s.threads = threads;
    return s;
}

BaselineKind ExperimentConfig::scheme_kind() const {
    if (scheme == "fixed") return BaselineKind::FixedPlacement;
    if (scheme == "wopa") return BaselineKind::WithoutPinching;
    return BaselineKind::OptimizedPlacement;
}

double ExperimentConfig::resolved_fixed_xp() const {
    return fixed_xp < 0.0 ? geometry.length / 2.0 : fixed_xp;
}

} // namespace pinchfl
