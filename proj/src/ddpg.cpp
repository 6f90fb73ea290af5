#include "ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace pinchfl {

namespace {

double clamp_unit(double x) { return std::min(1.0, std::max(-1.0, x)); }

double box_map(double raw, double lo, double hi) {
    return lo + (clamp_unit(raw) + 1.0) * 0.5 * (hi - lo);
}

double box_unmap(double value, double lo, double hi) {
    if (hi == lo) return 0.0;
    return clamp_unit((value - lo) / (hi - lo) * 2.0 - 1.0);
}

} // namespace

RoundDecision ActionSpace::to_decision(const std::vector<double>& raw) const {
    if (raw.size() != dim()) throw ConfigError("action dimension mismatch");
    RoundDecision d;
    std::size_t n = clients();
    std::size_t base = 0;
    if (has_xp) {
        d.x_p = box_map(raw[0], 0.0, length);
        base = 1;
    } else {
        d.x_p = fixed_xp;
    }
    d.powers.resize(n);
    d.freqs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.powers[i] = box_map(raw[base + i], 0.0, p_max[i]);
        d.freqs[i] = box_map(raw[base + n + i], f_floor(i), f_max[i]);
    }
    return d;
}

std::vector<double> ActionSpace::to_raw(const RoundDecision& decision) const {
    std::size_t n = clients();
    if (decision.powers.size() != n || decision.freqs.size() != n)
        throw ConfigError("decision dimension mismatch");
    std::vector<double> raw(dim());
    std::size_t base = 0;
    if (has_xp) {
        raw[0] = box_unmap(decision.x_p, 0.0, length);
        base = 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        raw[base + i] = box_unmap(decision.powers[i], 0.0, p_max[i]);
        raw[base + n + i] = box_unmap(decision.freqs[i], f_floor(i), f_max[i]);
    }
    return raw;
}

double reward_from_metrics(const RoundMetrics& metrics, const RoundInstance& instance,
                           double xi1, double xi2, double t_cap) {
    double t = std::min(metrics.round_latency, t_cap);
    double sign_sum = 0.0;
    for (std::size_t i = 0; i < metrics.clients.size(); ++i) {
        double margin = instance.clients[i].e_max -
                        (metrics.clients[i].e_cmp + metrics.clients[i].e_com);
        if (margin > 0.0)
            sign_sum += 1.0;
        else if (margin < 0.0)
            sign_sum -= 1.0;
    }
    return -xi1 * t + xi2 * sign_sum;
}

RoundEnv::RoundEnv(RoundInstance instance, double xi1, double xi2, double t_cap,
                   std::size_t episode_length, bool block_fading, std::uint64_t seed)
    : instance_(std::move(instance)),
      base_conv_gain_(instance_.conv_gain),
      xi1_(xi1),
      xi2_(xi2),
      t_cap_(t_cap),
      episode_length_(episode_length == 0 ? 1 : episode_length),
      block_fading_(block_fading),
      rng_(seed),
      current_xp_(instance_.geo.length / 2.0) {
    instance_.validate();
}

ActionSpace RoundEnv::action_space(double f_floor_frac) const {
    ActionSpace space;
    space.has_xp = instance_.pinching_enabled;
    space.fixed_xp = instance_.geo.length / 2.0;
    space.length = instance_.geo.length;
    space.f_floor_frac = f_floor_frac;
    for (const auto& c : instance_.clients) {
        space.p_max.push_back(c.p_max);
        space.f_max.push_back(c.f_max);
    }
    return space;
}

std::vector<double> RoundEnv::reset() {
    slot_ = 0;
    current_xp_ = instance_.geo.length / 2.0;
    if (block_fading_) {
        for (std::size_t i = 0; i < instance_.conv_gain.size(); ++i)
            instance_.conv_gain[i] = base_conv_gain_[i] * rng_.exponential();
    }
    return observe();
}

std::vector<double> RoundEnv::observe() const {
    std::size_t n = instance_.size();
    std::vector<double> state(2 * n);
    double max_samples = 0.0, max_gain = 0.0;
    std::vector<double> gains(n);
    for (std::size_t i = 0; i < n; ++i) {
        max_samples = std::max(max_samples, instance_.clients[i].samples);
        if (i < instance_.num_conventional || !instance_.pinching_enabled)
            gains[i] = instance_.conv_gain[i];
        else
            gains[i] = pinching_gain(instance_.geo, instance_.clients[i].position(), current_xp_);
        max_gain = std::max(max_gain, gains[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        state[i] = max_samples > 0.0 ? instance_.clients[i].samples / max_samples : 0.0;
        state[n + i] = max_gain > 0.0 ? gains[i] / max_gain : 0.0;
    }
    return state;
}

RoundEnv::StepResult RoundEnv::step(const RoundDecision& decision) {
    StepResult out;
    out.metrics = evaluate_round(instance_, decision);
    out.reward = reward_from_metrics(out.metrics, instance_, xi1_, xi2_, t_cap_);
    if (instance_.pinching_enabled) current_xp_ = decision.x_p;
    ++slot_;
    out.done = slot_ >= episode_length_;
    out.next_state = observe();
    return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("replay buffer capacity must be positive");
    store_.reserve(std::min<std::size_t>(capacity_, 4096));
}

void ReplayBuffer::push(Transition t) {
    if (store_.size() < capacity_) {
        store_.push_back(std::move(t));
    } else {
        store_[head_] = std::move(t);   // overwrite oldest
        head_ = (head_ + 1) % capacity_;
    }
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
    std::size_t n = store_.size();
    if (count > n) throw ConfigError("replay sample larger than buffer");
    std::vector<std::size_t> chosen;
    chosen.reserve(count);
    // Floyd: each index appears with equal probability, no replacement.
    for (std::size_t j = n - count; j < n; ++j) {
        std::size_t t = static_cast<std::size_t>(rng.uniform_int(0, j));
        if (std::find(chosen.begin(), chosen.end(), t) != chosen.end())
            chosen.push_back(j);
        else
            chosen.push_back(t);
    }
    std::vector<const Transition*> out;
    out.reserve(count);
    for (std::size_t idx : chosen) out.push_back(&store_[idx]);
    return out;
}

void DdpgHyper::validate() const {
    if (!(discount > 0.0 && discount < 1.0)) throw ConfigError("solver.discount must be in (0,1)");
    if (!(soft_update_rate > 0.0 && soft_update_rate <= 1.0))
        throw ConfigError("solver.soft_update must be in (0,1]");
    if (batch == 0) throw ConfigError("solver.batch must be positive");
    if (buffer_capacity < batch) throw ConfigError("solver.buffer must hold at least one batch");
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
        throw ConfigError("solver learning rates must be positive");
    if (!(noise_start >= 0.0) || !(noise_end >= 0.0) || noise_end > noise_start)
        throw ConfigError("solver noise schedule must decay from noise_start to noise_end >= 0");
    if (!(t_cap > 0.0)) throw ConfigError("solver.t_cap must be positive");
    if (episode_length == 0) throw ConfigError("solver.episode_length must be positive");
    if (hidden == 0) throw ConfigError("solver.hidden must be positive");
    if (!(f_floor_frac > 0.0 && f_floor_frac < 1.0))
        throw ConfigError("solver.f_floor_frac must be in (0,1)");
    if (!(divergence_cap > 0.0)) throw ConfigError("solver.divergence_cap must be positive");
}

DdpgAgent::DdpgAgent(std::size_t state_dim, ActionSpace space, DdpgHyper hyper, std::uint64_t seed)
    : space_(std::move(space)),
      hyper_(hyper),
      actor_(DenseNet::mlp(state_dim, {hyper.hidden, hyper.hidden}, space_.dim(),
                           Activation::Relu, Activation::Tanh)),
      critic_(DenseNet::mlp(state_dim + space_.dim(), {hyper.hidden, hyper.hidden}, 1,
                            Activation::Relu, Activation::Linear)),
      actor_target_(actor_),
      critic_target_(critic_),
      actor_opt_(actor_.param_count(), hyper.actor_lr),
      critic_opt_(critic_.param_count(), hyper.critic_lr),
      rng_(seed) {
    hyper_.validate();
    actor_.init(rng_);
    critic_.init(rng_);
    actor_target_.params() = actor_.params();
    critic_target_.params() = critic_.params();
}

std::vector<double> DdpgAgent::act(const std::vector<double>& state, double noise_scale) {
    std::vector<double> raw = actor_.forward(state);
    for (double& r : raw) r = clamp_unit(r + noise_scale * rng_.normal());
    return raw;
}

namespace {

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

} // namespace

double DdpgAgent::critic_update(const std::vector<const Transition*>& batch) {
    if (batch.empty()) throw ConfigError("empty training batch");
    double z = static_cast<double>(batch.size());
    std::vector<double> grad(critic_.param_count(), 0.0);
    double loss = 0.0;
    for (const Transition* tr : batch) {
        std::vector<double> next_action = actor_target_.forward(tr->next_state);
        double q_next = critic_target_.forward(concat(tr->next_state, next_action))[0];
        double y = tr->reward + (tr->done ? 0.0 : hyper_.discount * q_next);
        std::vector<double> input = concat(tr->state, tr->action);
        DenseNet::Trace trace;
        double q = critic_.forward(input, trace)[0];
        double diff = q - y;
        loss += diff * diff / z;
        std::vector<double> dout{2.0 * diff / z};
        critic_.backward(input, trace, dout, grad);
    }
    critic_opt_.step(critic_.params(), grad);
    return loss;
}

double DdpgAgent::actor_update(const std::vector<const Transition*>& batch) {
    if (batch.empty()) throw ConfigError("empty training batch");
    double z = static_cast<double>(batch.size());
    std::vector<double> grad(actor_.param_count(), 0.0);
    std::vector<double> scratch(critic_.param_count(), 0.0);
    std::size_t state_dim = actor_.input_dim();
    double objective = 0.0;
    for (const Transition* tr : batch) {
        DenseNet::Trace atrace;
        std::vector<double> action = actor_.forward(tr->state, atrace);
        std::vector<double> input = concat(tr->state, action);
        DenseNet::Trace ctrace;
        double q = critic_.forward(input, ctrace)[0];
        objective += q / z;
        // Ascend on mean Q: descend on its negation through critic into actor.
        std::vector<double> dout{-1.0 / z};
        std::vector<double> dinput = critic_.backward(input, ctrace, dout, scratch);
        std::vector<double> daction(dinput.begin() + static_cast<std::ptrdiff_t>(state_dim),
                                    dinput.end());
        actor_.backward(tr->state, atrace, daction, grad);
    }
    actor_opt_.step(actor_.params(), grad);
    return objective;
}

void DdpgAgent::soft_update_targets() {
    soft_update(actor_.params(), actor_target_.params(), hyper_.soft_update_rate);
    soft_update(critic_.params(), critic_target_.params(), hyper_.soft_update_rate);
}

std::string DdpgAgent::checkpoint_json(std::uint64_t master_seed) const {
    nlohmann::json j;
    j["kind"] = "ddpg-checkpoint";
    j["master_seed"] = master_seed;
    j["state_dim"] = actor_.input_dim();
    j["space"] = {{"has_xp", space_.has_xp},     {"fixed_xp", space_.fixed_xp},
                  {"length", space_.length},     {"p_max", space_.p_max},
                  {"f_max", space_.f_max},       {"f_floor_frac", space_.f_floor_frac}};
    j["hyper"] = {{"discount", hyper_.discount},
                  {"soft_update", hyper_.soft_update_rate},
                  {"batch", hyper_.batch},
                  {"buffer", hyper_.buffer_capacity},
                  {"actor_lr", hyper_.actor_lr},
                  {"critic_lr", hyper_.critic_lr},
                  {"noise_start", hyper_.noise_start},
                  {"noise_end", hyper_.noise_end},
                  {"xi1", hyper_.xi1},
                  {"xi2", hyper_.xi2},
                  {"t_cap", hyper_.t_cap},
                  {"episode_length", hyper_.episode_length},
                  {"total_steps", hyper_.total_steps},
                  {"warmup_steps", hyper_.warmup_steps},
                  {"hidden", hyper_.hidden},
                  {"f_floor_frac", hyper_.f_floor_frac},
                  {"divergence_cap", hyper_.divergence_cap}};
    j["actor"] = actor_.params();
    j["critic"] = critic_.params();
    j["actor_target"] = actor_target_.params();
    j["critic_target"] = critic_target_.params();
    j["actor_opt"] = {{"t", actor_opt_.steps()}, {"m", actor_opt_.m()}, {"v", actor_opt_.v()}};
    j["critic_opt"] = {{"t", critic_opt_.steps()}, {"m", critic_opt_.m()}, {"v", critic_opt_.v()}};
    j["rng"] = rng_.state();
    return j.dump(2);
}

DdpgAgent DdpgAgent::from_checkpoint_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || j.value("kind", "") != std::string("ddpg-checkpoint"))
        throw DependencyError("not a ddpg checkpoint file");
    ActionSpace space;
    space.has_xp = j["space"]["has_xp"].get<bool>();
    space.fixed_xp = j["space"]["fixed_xp"].get<double>();
    space.length = j["space"]["length"].get<double>();
    space.p_max = j["space"]["p_max"].get<std::vector<double>>();
    space.f_max = j["space"]["f_max"].get<std::vector<double>>();
    space.f_floor_frac = j["space"]["f_floor_frac"].get<double>();
    DdpgHyper hyper;
    const auto& h = j["hyper"];
    hyper.discount = h["discount"].get<double>();
    hyper.soft_update_rate = h["soft_update"].get<double>();
    hyper.batch = h["batch"].get<std::size_t>();
    hyper.buffer_capacity = h["buffer"].get<std::size_t>();
    hyper.actor_lr = h["actor_lr"].get<double>();
    hyper.critic_lr = h["critic_lr"].get<double>();
    hyper.noise_start = h["noise_start"].get<double>();
    hyper.noise_end = h["noise_end"].get<double>();
    hyper.xi1 = h["xi1"].get<double>();
    hyper.xi2 = h["xi2"].get<double>();
    hyper.t_cap = h["t_cap"].get<double>();
    hyper.episode_length = h["episode_length"].get<std::size_t>();
    hyper.total_steps = h["total_steps"].get<std::size_t>();
    hyper.warmup_steps = h["warmup_steps"].get<std::size_t>();
    hyper.hidden = h["hidden"].get<std::size_t>();
    hyper.f_floor_frac = h["f_floor_frac"].get<double>();
    hyper.divergence_cap = h["divergence_cap"].get<double>();
    DdpgAgent agent(j["state_dim"].get<std::size_t>(), space, hyper, 0);
    agent.actor_.params() = j["actor"].get<std::vector<double>>();
    agent.critic_.params() = j["critic"].get<std::vector<double>>();
    agent.actor_target_.params() = j["actor_target"].get<std::vector<double>>();
    agent.critic_target_.params() = j["critic_target"].get<std::vector<double>>();
    agent.actor_opt_.restore(j["actor_opt"]["t"].get<std::uint64_t>(),
                             j["actor_opt"]["m"].get<std::vector<double>>(),
                             j["actor_opt"]["v"].get<std::vector<double>>());
    agent.critic_opt_.restore(j["critic_opt"]["t"].get<std::uint64_t>(),
                              j["critic_opt"]["m"].get<std::vector<double>>(),
                              j["critic_opt"]["v"].get<std::vector<double>>());
    agent.rng_.restore(j["rng"].get<std::string>());
    return agent;
}

TrainResult train_ddpg(RoundEnv& env, DdpgAgent& agent, const DdpgHyper& hyper) {
    hyper.validate();
    const ActionSpace& space = agent.space();
    ReplayBuffer buffer(hyper.buffer_capacity);
    TrainResult result;
    result.best_t = std::numeric_limits<double>::infinity();
    result.best_excess = std::numeric_limits<double>::infinity();

    std::vector<double> state = env.reset();
    double ep_reward = 0.0;
    std::size_t ep_steps = 0, episode = 0, last_violations = 0;

    double decay_span = hyper.total_steps > 1 ? static_cast<double>(hyper.total_steps - 1) : 1.0;
    double decay_ratio = hyper.noise_start > 0.0 ? hyper.noise_end / hyper.noise_start : 0.0;

    for (std::size_t j = 0; j < hyper.total_steps; ++j) {
        double noise = hyper.noise_start;
        if (hyper.noise_start > 0.0)
            noise = hyper.noise_start *
                    std::pow(decay_ratio, static_cast<double>(j) / decay_span);
        std::vector<double> raw;
        if (j < hyper.warmup_steps) {
            raw.resize(space.dim());
            for (double& r : raw) r = agent.rng().uniform(-1.0, 1.0);
        } else {
            raw = agent.act(state, noise);
        }
        RoundDecision decision = space.to_decision(raw);
        RoundEnv::StepResult sr = env.step(decision);

        bool energy_ok = sr.metrics.energy_violations == 0;
        result.action_energy_ok.push_back(energy_ok);
        last_violations = sr.metrics.energy_violations;
        bool usable = energy_ok && !sr.metrics.has_infinite;
        if (usable && (!result.best_feasible || sr.metrics.round_latency < result.best_t)) {
            result.best_t = sr.metrics.round_latency;
            result.best_decision = decision;
            result.best_feasible = true;
        } else if (!result.best_feasible && !usable &&
                   sr.metrics.energy_excess < result.best_excess) {
            result.best_excess = sr.metrics.energy_excess;
            result.best_decision = decision;
            result.best_t = sr.metrics.round_latency;
        }

        buffer.push(Transition{state, raw, sr.reward, sr.next_state, sr.done});
        ep_reward += sr.reward;
        ++ep_steps;
        if (sr.done) {
            double best_feasible_t =
                result.best_feasible ? result.best_t : std::numeric_limits<double>::infinity();
            result.history.push_back(EpisodeStat{episode, ep_reward / static_cast<double>(ep_steps),
                                                 best_feasible_t, last_violations});
            ++episode;
            ep_reward = 0.0;
            ep_steps = 0;
            state = env.reset();
        } else {
            state = sr.next_state;
        }

        if (buffer.size() >= hyper.batch && j >= hyper.warmup_steps) {
            auto batch = buffer.sample(hyper.batch, agent.rng());
            double loss = agent.critic_update(batch);
            if (!std::isfinite(loss) || loss > hyper.divergence_cap)
                throw DivergenceError("critic loss " + std::to_string(loss) +
                                      " exceeded divergence cap after " + std::to_string(j + 1) +
                                      " steps");
            result.final_critic_loss = loss;
            agent.actor_update(batch);
            agent.soft_update_targets();
        }
    }
    result.steps = hyper.total_steps;
    return result;
}

} // namespace pinchfl
