#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "net.hpp"
#include "noma.hpp"
#include "rng.hpp"

namespace pinchfl {

// Affine map between raw network outputs in [-1,1]^dim and the decision box:
// optional element abscissa in [0, L], then per-client power in [0, p_max]
// and CPU frequency in [f_floor, f_max] (floored away from the Eq.-breaking
// zero).  Raw values are clamped to [-1,1] first, so mapped decisions always
// satisfy the box constraints.
struct ActionSpace {
    bool has_xp = true;
    double fixed_xp = 0.0;      // used when has_xp is false
    double length = 0.0;
    std::vector<double> p_max;
    std::vector<double> f_max;
    double f_floor_frac = 0.01;

    std::size_t clients() const { return p_max.size(); }
    std::size_t dim() const { return (has_xp ? 1 : 0) + 2 * p_max.size(); }
    double f_floor(std::size_t n) const { return f_floor_frac * f_max[n]; }

    RoundDecision to_decision(const std::vector<double>& raw) const;
    std::vector<double> to_raw(const RoundDecision& decision) const;
};

// Eq.-style scalar reward: negative weighted clipped round latency plus a
// per-client energy-feasibility sign term (sgn(E_max - e_cmp - e_com)).
double reward_from_metrics(const RoundMetrics& metrics, const RoundInstance& instance,
                           double xi1, double xi2, double t_cap);

// Single-round environment over a frozen instance.  State is [D_n/max D,
// gain_n/max gain] with the element-served gains evaluated at the most
// recently executed abscissa.  Episodes span a fixed number of slots
// (default 1, a contextual-bandit usage); block-fading mode redraws the
// server-link gains at each reset.
class RoundEnv {
public:
    RoundEnv(RoundInstance instance, double xi1, double xi2, double t_cap,
             std::size_t episode_length, bool block_fading, std::uint64_t seed);

    const RoundInstance& instance() const { return instance_; }
    std::size_t state_dim() const { return 2 * instance_.size(); }
    ActionSpace action_space(double f_floor_frac) const;

    std::vector<double> reset();

    struct StepResult {
        std::vector<double> next_state;
        double reward = 0.0;
        bool done = false;
        RoundMetrics metrics;
    };
    StepResult step(const RoundDecision& decision);

private:
    std::vector<double> observe() const;

    RoundInstance instance_;
    std::vector<double> base_conv_gain_;
    double xi1_, xi2_, t_cap_;
    std::size_t episode_length_;
    bool block_fading_;
    Rng rng_;
    double current_xp_;
    std::size_t slot_ = 0;
};

struct Transition {
    std::vector<double> state;
    std::vector<double> action;   // raw, in [-1,1]^dim
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

// Ring buffer with uniform without-replacement batch sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return store_.size(); }
    std::size_t capacity() const { return capacity_; }

    // Floyd's algorithm; indices are distinct within a batch.
    std::vector<const Transition*> sample(std::size_t count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> store_;
};

struct DdpgHyper {
    double discount = 0.99;
    double soft_update_rate = 0.005;
    std::size_t batch = 64;
    std::size_t buffer_capacity = 100000;
    double actor_lr = 1.0e-4;
    double critic_lr = 1.0e-3;
    double noise_start = 0.2;
    double noise_end = 0.02;
    double xi1 = 1.0;
    double xi2 = 1.0;
    double t_cap = 100.0;
    std::size_t episode_length = 1;
    std::size_t total_steps = 20000;
    std::size_t warmup_steps = 1000;
    std::size_t hidden = 64;
    double f_floor_frac = 0.01;
    double divergence_cap = 1.0e12;

    void validate() const;
};

// Actor-critic pair with target copies, from-scratch backprop updates.
class DdpgAgent {
public:
    DdpgAgent(std::size_t state_dim, ActionSpace space, DdpgHyper hyper, std::uint64_t seed);

    // Raw action in [-1,1]^dim: squashed actor output plus Gaussian noise,
    // clamped back into the box.
    std::vector<double> act(const std::vector<double>& state, double noise_scale);

    // One mean-squared-TD-error descent step on the critic; returns the
    // pre-step loss.
    double critic_update(const std::vector<const Transition*>& batch);

    // One ascent step on mean Q(s, actor(s)); returns the pre-step objective.
    double actor_update(const std::vector<const Transition*>& batch);

    void soft_update_targets();

    const ActionSpace& space() const { return space_; }
    DenseNet& actor() { return actor_; }
    DenseNet& critic() { return critic_; }
    DenseNet& actor_target() { return actor_target_; }
    DenseNet& critic_target() { return critic_target_; }
    const DdpgHyper& hyper() const { return hyper_; }
    Rng& rng() { return rng_; }

    std::string checkpoint_json(std::uint64_t master_seed) const;
    static DdpgAgent from_checkpoint_json(const std::string& text);

private:
    ActionSpace space_;
    DdpgHyper hyper_;
    DenseNet actor_, critic_, actor_target_, critic_target_;
    Adam actor_opt_, critic_opt_;
    Rng rng_;
};

struct EpisodeStat {
    std::size_t episode = 0;
    double mean_reward = 0.0;
    double best_t = 0.0;         // best feasible latency seen so far
    std::size_t energy_violations = 0;
};

struct TrainResult {
    std::vector<EpisodeStat> history;
    RoundDecision best_decision;
    double best_t = 0.0;
    bool best_feasible = false;
    double best_excess = 0.0;            // when nothing feasible was seen
    double final_critic_loss = 0.0;
    std::size_t steps = 0;
    std::vector<bool> action_energy_ok;  // feasibility of every emitted action, in order
};

// Full training loop; throws DivergenceError when the critic loss passes the
// configured cap.  Deterministic for a fixed seed.
TrainResult train_ddpg(RoundEnv& env, DdpgAgent& agent, const DdpgHyper& hyper);

} // namespace pinchfl
