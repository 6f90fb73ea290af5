#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "channel.hpp"
#include "ddpg.hpp"
#include "errors.hpp"
#include "noma.hpp"
#include "rng.hpp"

using namespace pinchfl;

namespace {

ClientProfile participant(std::uint32_t id, double x, double y, double samples) {
    ClientProfile c;
    c.id = id;
    c.x = x;
    c.y = y;
    c.samples = samples;
    c.cycles = 2.0e4;
    c.f_max = 2.0e9;
    c.p_max = 0.2;
    c.e_max = 1.0;
    c.upload_bits = 1.0e6;
    return c;
}

// 2 conventional + 2 element-served clients on the default floor plan.
RoundInstance small_instance() {
    RoundInstance inst;
    inst.geo = NetworkGeometry{};
    inst.clients = {participant(0, 1.0, 1.0, 800.0), participant(1, 2.0, -1.5, 1500.0),
                    participant(2, 20.0, 2.0, 1000.0), participant(3, 25.0, -3.0, 2000.0)};
    inst.num_conventional = 2;
    inst.pinching_enabled = true;
    for (const auto& c : inst.clients)
        inst.conv_gain.push_back(conventional_gain(inst.geo, c.position()));
    inst.validate();
    return inst;
}

ActionSpace small_space(std::size_t n = 2) {
    ActionSpace space;
    space.has_xp = true;
    space.length = 30.0;
    space.p_max.assign(n, 0.2);
    space.f_max.assign(n, 2.0e9);
    space.f_floor_frac = 0.01;
    return space;
}

ClientMetrics feasible_client(double e_cmp, double e_com) {
    ClientMetrics m;
    m.e_cmp = e_cmp;
    m.e_com = e_com;
    return m;
}

} // namespace

TEST_CASE("action box corners and round trip") {
    auto space = small_space();
    CHECK(space.dim() == 5);

    auto hi = space.to_decision({1.0, 1.0, 1.0, 1.0, 1.0});
    CHECK(hi.x_p == doctest::Approx(30.0));
    CHECK(hi.powers[0] == doctest::Approx(0.2));
    CHECK(hi.powers[1] == doctest::Approx(0.2));
    CHECK(hi.freqs[0] == doctest::Approx(2.0e9));
    CHECK(hi.freqs[1] == doctest::Approx(2.0e9));

    auto lo = space.to_decision({-1.0, -1.0, -1.0, -1.0, -1.0});
    CHECK(lo.x_p == doctest::Approx(0.0));
    CHECK(lo.powers[0] == doctest::Approx(0.0));
    CHECK(lo.freqs[0] == doctest::Approx(0.01 * 2.0e9));   // frequency floor, not zero
    CHECK(lo.freqs[1] == doctest::Approx(0.01 * 2.0e9));

    // Out-of-range raw values clamp into the box first.
    auto clamped = space.to_decision({5.0, -3.0, 0.0, 2.0, -9.0});
    CHECK(clamped.x_p == doctest::Approx(30.0));
    CHECK(clamped.powers[0] == doctest::Approx(0.0));
    CHECK(clamped.powers[1] == doctest::Approx(0.1));
    CHECK(clamped.freqs[0] == doctest::Approx(2.0e9));
    CHECK(clamped.freqs[1] == doctest::Approx(0.01 * 2.0e9));

    Rng rng(derive_seed(7, "ddpg-box"));
    for (int t = 0; t < 200; ++t) {
        std::vector<double> raw(space.dim());
        for (auto& v : raw) v = rng.uniform(-1.0, 1.0);
        auto rt = space.to_raw(space.to_decision(raw));
        for (std::size_t i = 0; i < raw.size(); ++i)
            CHECK(rt[i] == doctest::Approx(raw[i]).epsilon(1e-9));
    }

    // Without an element abscissa the first slot disappears.
    auto fixed = small_space();
    fixed.has_xp = false;
    fixed.fixed_xp = 12.5;
    CHECK(fixed.dim() == 4);
    auto d = fixed.to_decision({0.0, 0.0, 0.0, 0.0});
    CHECK(d.x_p == doctest::Approx(12.5));
    CHECK(d.powers[0] == doctest::Approx(0.1));

    CHECK_THROWS_AS(space.to_decision({0.0, 0.0}), ConfigError);
    RoundDecision bad;
    bad.powers = {0.1};
    bad.freqs = {1.0e9, 1.0e9};
    CHECK_THROWS_AS(space.to_raw(bad), ConfigError);
}

TEST_CASE("reward hand values") {
    RoundInstance inst = small_instance();
    RoundMetrics m;
    m.round_latency = 0.25;
    m.clients = {feasible_client(0.01, 0.01), feasible_client(0.02, 0.0),
                 feasible_client(0.0, 0.03), feasible_client(0.1, 0.1)};

    // All four feasible: R = -xi1*T + 4*xi2.
    CHECK(reward_from_metrics(m, inst, 1.0, 1.0, 100.0) == doctest::Approx(-0.25 + 4.0));
    CHECK(reward_from_metrics(m, inst, 2.0, 0.5, 100.0) == doctest::Approx(-0.5 + 2.0));

    // Exactly one infeasible: sign sum drops to N - 2.
    m.clients[3] = feasible_client(0.9, 0.2);
    CHECK(reward_from_metrics(m, inst, 1.0, 1.0, 100.0) == doctest::Approx(-0.25 + 2.0));

    // Zero-latency boundary: R = N * xi2.
    m.clients[3] = feasible_client(0.1, 0.1);
    m.round_latency = 0.0;
    CHECK(reward_from_metrics(m, inst, 3.0, 2.0, 100.0) == doctest::Approx(8.0));

    // Latency clips at t_cap (including the infinite sentinel).
    m.round_latency = std::numeric_limits<double>::infinity();
    CHECK(reward_from_metrics(m, inst, 1.0, 1.0, 2.0) == doctest::Approx(-2.0 + 4.0));
    m.round_latency = 7.0;
    CHECK(reward_from_metrics(m, inst, 1.0, 1.0, 2.0) == doctest::Approx(-2.0 + 4.0));

    // Exact-margin clients contribute zero sign.
    m.round_latency = 1.0;
    m.clients[0] = feasible_client(0.5, 0.5);   // e_max = 1.0 exactly
    CHECK(reward_from_metrics(m, inst, 1.0, 1.0, 100.0) == doctest::Approx(-1.0 + 3.0));
}

TEST_CASE("environment state and stepping") {
    RoundInstance inst = small_instance();
    RoundEnv env(inst, 1.0, 1.0, 100.0, 1, false, derive_seed(7, "ddpg-env"));
    CHECK(env.state_dim() == 8);

    auto s0 = env.reset();
    REQUIRE(s0.size() == 8);
    for (double v : s0) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // Sample share: client 3 holds the largest dataset.
    CHECK(s0[3] == doctest::Approx(1.0));
    CHECK(s0[0] == doctest::Approx(800.0 / 2000.0));
    // Some gain entry is normalized to 1.
    CHECK(*std::max_element(s0.begin() + 4, s0.end()) == doctest::Approx(1.0));

    // Without fading, resets are identical.
    auto s1 = env.reset();
    CHECK(s0 == s1);

    // A step at a new abscissa changes the element-served gain entries.
    auto space = env.action_space(0.01);
    RoundDecision d = space.to_decision(std::vector<double>(space.dim(), 0.5));
    auto sr = env.step(d);
    CHECK(sr.done);
    CHECK(std::isfinite(sr.reward));
    CHECK(sr.metrics.clients.size() == 4);

    // Episode length 3 defers done.
    RoundEnv env3(inst, 1.0, 1.0, 100.0, 3, false, derive_seed(7, "ddpg-env3"));
    env3.reset();
    CHECK_FALSE(env3.step(d).done);
    CHECK_FALSE(env3.step(d).done);
    CHECK(env3.step(d).done);

    // Block fading redraws server-link gains on reset.
    RoundEnv envf(inst, 1.0, 1.0, 100.0, 1, true, derive_seed(7, "ddpg-envf"));
    auto f0 = envf.reset();
    auto f1 = envf.reset();
    CHECK(f0 != f1);
}

TEST_CASE("environment reward responds to energy budget") {
    RoundInstance inst = small_instance();
    for (auto& c : inst.clients) c.e_max = 1.0e-6;   // force violations
    RoundEnv env(inst, 1.0, 1.0, 100.0, 1, false, derive_seed(7, "ddpg-energy"));
    env.reset();
    auto space = env.action_space(0.01);
    auto sr = env.step(space.to_decision(std::vector<double>(space.dim(), 0.9)));
    CHECK(sr.metrics.energy_violations == 4);
    // All four signs flip: reward = -T - 4.
    CHECK(sr.reward == doctest::Approx(-std::min(sr.metrics.round_latency, 100.0) - 4.0));
}

TEST_CASE("replay buffer evicts oldest and samples distinct") {
    ReplayBuffer buf(4);
    CHECK_THROWS_AS(ReplayBuffer(0), ConfigError);
    for (int i = 0; i < 6; ++i) {
        Transition t;
        t.state = {static_cast<double>(i)};
        t.action = {0.0};
        t.reward = static_cast<double>(i);
        t.next_state = {0.0};
        t.done = true;
        buf.push(std::move(t));
    }
    CHECK(buf.size() == 4);
    CHECK(buf.capacity() == 4);

    Rng rng(derive_seed(7, "ddpg-replay"));
    auto all = buf.sample(4, rng);
    std::set<double> rewards;
    std::set<const Transition*> ptrs;
    for (const Transition* t : all) {
        rewards.insert(t->reward);
        ptrs.insert(t);
    }
    CHECK(ptrs.size() == 4);
    CHECK(rewards == std::set<double>{2.0, 3.0, 4.0, 5.0});   // 0 and 1 evicted

    CHECK_THROWS_AS(buf.sample(5, rng), ConfigError);

    // Single-draw frequencies stay near uniform.
    std::array<int, 6> count{};
    for (int k = 0; k < 4000; ++k) {
        auto one = buf.sample(1, rng);
        count[static_cast<int>(one[0]->reward)]++;
    }
    for (int r = 2; r <= 5; ++r) {
        CHECK(count[r] > 4000 / 4 * 0.8);
        CHECK(count[r] < 4000 / 4 * 1.2);
    }
}

TEST_CASE("agent action determinism and clamping") {
    auto space = small_space();
    DdpgHyper hyper;
    DdpgAgent a1(8, space, hyper, derive_seed(7, "ddpg-agent"));
    DdpgAgent a2(8, space, hyper, derive_seed(7, "ddpg-agent"));
    std::vector<double> state(8, 0.4);

    // act always advances the noise stream (scale-independent draw count), so
    // advance both agents in lockstep.
    auto n0 = a1.act(state, 0.0);
    CHECK(n0 == a1.actor().forward(state));
    CHECK(a2.act(state, 0.0) == n0);
    CHECK(a1.act(state, 0.3) == a2.act(state, 0.3));

    auto wild = a1.act(state, 50.0);
    for (double v : wild) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("critic update: zero loss at the minimizer and hand-computed single sample") {
    auto space = small_space(1);   // dim 3
    DdpgHyper hyper;
    hyper.hidden = 8;
    DdpgAgent agent(2, space, hyper, derive_seed(7, "ddpg-critic"));

    // Constant critic: zero all params, set the final bias.
    auto& cp = agent.critic().params();
    std::fill(cp.begin(), cp.end(), 0.0);
    cp.back() = 0.7;
    auto before = cp;

    Transition t;
    t.state = {0.2, 0.9};
    t.action = {0.1, -0.3, 0.5};
    t.reward = 0.7;   // y = r on done transitions = Q everywhere
    t.next_state = {0.2, 0.9};
    t.done = true;

    double loss = agent.critic_update({&t, &t});
    CHECK(loss == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(agent.critic().params() == before);   // zero gradient moves nothing

    // Hand-computed Z = 1 loss on fresh random nets.
    DdpgAgent agent2(2, space, hyper, derive_seed(8, "ddpg-critic"));
    Transition u;
    u.state = {0.4, 0.1};
    u.action = {-0.2, 0.6, 0.0};
    u.reward = -1.3;
    u.next_state = {0.8, 0.5};
    u.done = false;

    std::vector<double> na = agent2.actor_target().forward(u.next_state);
    std::vector<double> nin = u.next_state;
    nin.insert(nin.end(), na.begin(), na.end());
    double qn = agent2.critic_target().forward(nin)[0];
    double y = u.reward + hyper.discount * qn;
    std::vector<double> in = u.state;
    in.insert(in.end(), u.action.begin(), u.action.end());
    double q = agent2.critic().forward(in)[0];
    double want = (y - q) * (y - q);

    CHECK(agent2.critic_update({&u}) == doctest::Approx(want).epsilon(1e-12));

    CHECK_THROWS_AS(agent2.critic_update({}), ConfigError);
}

TEST_CASE("critic TD gradient matches finite differences and drives the Adam step") {
    auto space = small_space();   // dim 5
    DdpgHyper hyper;
    hyper.hidden = 8;
    DdpgAgent agent(4, space, hyper, derive_seed(9, "ddpg-critic-fd"));
    Rng rng(derive_seed(9, "ddpg-critic-data"));

    std::vector<Transition> data(6);
    for (auto& t : data) {
        t.state.resize(4);
        t.action.resize(5);
        t.next_state.resize(4);
        for (auto& v : t.state) v = rng.uniform(0.0, 1.0);
        for (auto& v : t.action) v = rng.uniform(-1.0, 1.0);
        for (auto& v : t.next_state) v = rng.uniform(0.0, 1.0);
        t.reward = rng.uniform(-2.0, 2.0);
        t.done = rng.uniform() < 0.3;
    }
    std::vector<const Transition*> batch;
    for (auto& t : data) batch.push_back(&t);
    double z = static_cast<double>(batch.size());

    // Frozen targets: y_j never depends on the online critic parameters.
    std::vector<double> ys;
    for (const Transition* t : batch) {
        auto na = agent.actor_target().forward(t->next_state);
        std::vector<double> nin = t->next_state;
        nin.insert(nin.end(), na.begin(), na.end());
        double qn = agent.critic_target().forward(nin)[0];
        ys.push_back(t->reward + (t->done ? 0.0 : hyper.discount * qn));
    }
    auto loss_at = [&]() {
        double l = 0.0;
        for (std::size_t j = 0; j < batch.size(); ++j) {
            std::vector<double> in = batch[j]->state;
            in.insert(in.end(), batch[j]->action.begin(), batch[j]->action.end());
            double q = agent.critic().forward(in)[0];
            l += (q - ys[j]) * (q - ys[j]) / z;
        }
        return l;
    };

    // Analytic batch gradient assembled the same way the update does.
    std::vector<double> grad(agent.critic().param_count(), 0.0);
    for (std::size_t j = 0; j < batch.size(); ++j) {
        std::vector<double> in = batch[j]->state;
        in.insert(in.end(), batch[j]->action.begin(), batch[j]->action.end());
        DenseNet::Trace trace;
        double q = agent.critic().forward(in, trace)[0];
        std::vector<double> dout{2.0 * (q - ys[j]) / z};
        agent.critic().backward(in, trace, dout, grad);
    }

    const double h = 1.0e-6;
    auto& params = agent.critic().params();
    std::size_t checked = 0;
    for (std::size_t i = 0; i < params.size(); i += 7) {   // stride keeps runtime low
        double keep = params[i];
        params[i] = keep + h;
        double up = loss_at();
        params[i] = keep - h;
        double down = loss_at();
        params[i] = keep;
        double fd = (up - down) / (2.0 * h);
        CHECK(std::abs(fd - grad[i]) <=
              1.0e-4 * std::max(std::abs(fd), std::abs(grad[i])) + 1.0e-8);
        ++checked;
    }
    CHECK(checked > 20);

    // The update must apply exactly Adam(grad) from the fresh optimizer state.
    auto prev = params;
    agent.critic_update(batch);
    for (std::size_t i = 0; i < params.size(); ++i) {
        double mhat = grad[i];   // first step: mhat = g, vhat = g^2
        double want = prev[i] - hyper.critic_lr * mhat / (std::abs(grad[i]) + 1.0e-8);
        CHECK(params[i] == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("actor update ascends the critic objective") {
    auto space = small_space();
    DdpgHyper hyper;
    hyper.hidden = 16;
    hyper.actor_lr = 1.0e-3;
    DdpgAgent agent(4, space, hyper, derive_seed(10, "ddpg-actor"));
    Rng rng(derive_seed(10, "ddpg-actor-data"));

    std::vector<Transition> data(8);
    for (auto& t : data) {
        t.state.resize(4);
        for (auto& v : t.state) v = rng.uniform(0.0, 1.0);
        t.action.assign(5, 0.0);
        t.next_state = t.state;
        t.done = true;
    }
    std::vector<const Transition*> batch;
    for (auto& t : data) batch.push_back(&t);

    auto objective = [&]() {
        double o = 0.0;
        for (const Transition* t : batch) {
            auto a = agent.actor().forward(t->state);
            std::vector<double> in = t->state;
            in.insert(in.end(), a.begin(), a.end());
            o += agent.critic().forward(in)[0] / static_cast<double>(batch.size());
        }
        return o;
    };

    double first = objective();
    double reported = agent.actor_update(batch);
    CHECK(reported == doctest::Approx(first).epsilon(1e-12));   // pre-step objective
    for (int k = 0; k < 100; ++k) agent.actor_update(batch);
    CHECK(objective() > first);

    CHECK_THROWS_AS(agent.actor_update({}), ConfigError);
}

TEST_CASE("one-dimensional toy: actor converges to the critic argmax") {
    // Action space with only the element abscissa; state is one flat feature.
    ActionSpace space;
    space.has_xp = true;
    space.length = 30.0;

    DdpgHyper hyper;
    hyper.hidden = 32;
    hyper.actor_lr = 2.0e-3;
    hyper.critic_lr = 2.0e-3;
    DdpgAgent agent(1, space, hyper, derive_seed(11, "ddpg-toy"));
    Rng rng(derive_seed(11, "ddpg-toy-data"));

    // Done transitions with reward -(a - 0.2)^2: regression target for Q.
    const double target = 0.2;
    std::vector<Transition> data(256);
    for (std::size_t i = 0; i < data.size(); ++i) {
        double a = -1.0 + 2.0 * static_cast<double>(i) / (data.size() - 1);
        data[i].state = {0.5};
        data[i].action = {a};
        data[i].reward = -(a - target) * (a - target);
        data[i].next_state = {0.5};
        data[i].done = true;
    }
    std::vector<const Transition*> batch;
    for (auto& t : data) batch.push_back(&t);

    double loss = 0.0;
    for (int k = 0; k < 1500; ++k) loss = agent.critic_update(batch);
    CHECK(loss < 1.0e-3);   // quadratic fit achieved

    for (int k = 0; k < 2000; ++k) agent.actor_update(batch);
    double nu = agent.actor().forward({0.5})[0];
    CHECK(nu == doctest::Approx(target).epsilon(0.25));
    CHECK(std::abs(nu - target) < 0.05);
}

TEST_CASE("hyperparameter validation") {
    DdpgHyper h;
    CHECK_NOTHROW(h.validate());
    auto bad = h;
    bad.discount = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = h;
    bad.soft_update_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = h;
    bad.buffer_capacity = h.batch - 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = h;
    bad.noise_end = h.noise_start + 0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = h;
    bad.f_floor_frac = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = h;
    bad.t_cap = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("checkpoint round trip preserves the full learning state") {
    auto space = small_space();
    DdpgHyper hyper;
    hyper.hidden = 8;
    hyper.xi1 = 2.5;
    hyper.t_cap = 3.0;
    DdpgAgent agent(4, space, hyper, derive_seed(12, "ddpg-ckpt"));
    Rng rng(derive_seed(12, "ddpg-ckpt-data"));

    std::vector<Transition> data(16);
    for (auto& t : data) {
        t.state.resize(4);
        t.action.resize(5);
        t.next_state.resize(4);
        for (auto& v : t.state) v = rng.uniform(0.0, 1.0);
        for (auto& v : t.action) v = rng.uniform(-1.0, 1.0);
        for (auto& v : t.next_state) v = rng.uniform(0.0, 1.0);
        t.reward = rng.uniform(-2.0, 2.0);
        t.done = false;
    }
    std::vector<const Transition*> batch;
    for (auto& t : data) batch.push_back(&t);
    for (int k = 0; k < 5; ++k) {
        agent.critic_update(batch);
        agent.actor_update(batch);
        agent.soft_update_targets();
    }

    std::string ckpt = agent.checkpoint_json(42);
    DdpgAgent twin = DdpgAgent::from_checkpoint_json(ckpt);
    CHECK(twin.actor().params() == agent.actor().params());
    CHECK(twin.critic().params() == agent.critic().params());
    CHECK(twin.actor_target().params() == agent.actor_target().params());
    CHECK(twin.critic_target().params() == agent.critic_target().params());
    CHECK(twin.hyper().xi1 == 2.5);
    CHECK(twin.hyper().t_cap == 3.0);

    // Future updates and noisy actions replay identically.
    double l1 = agent.critic_update(batch);
    double l2 = twin.critic_update(batch);
    CHECK(l1 == l2);
    agent.actor_update(batch);
    twin.actor_update(batch);
    CHECK(twin.actor().params() == agent.actor().params());
    std::vector<double> s(4, 0.3);
    CHECK(agent.act(s, 0.2) == twin.act(s, 0.2));

    CHECK_THROWS_AS(DdpgAgent::from_checkpoint_json("{}"), DependencyError);
    CHECK_THROWS_AS(DdpgAgent::from_checkpoint_json("not json"), DependencyError);
}

TEST_CASE("training loop basics") {
    RoundInstance inst = small_instance();

    // Zero steps: empty history, zero step count.
    {
        DdpgHyper hyper;
        hyper.total_steps = 0;
        hyper.warmup_steps = 0;
        RoundEnv env(inst, hyper.xi1, hyper.xi2, hyper.t_cap, hyper.episode_length, false,
                     derive_seed(13, "ddpg-train0"));
        DdpgAgent agent(env.state_dim(), env.action_space(hyper.f_floor_frac), hyper,
                        derive_seed(13, "ddpg-agent0"));
        auto result = train_ddpg(env, agent, hyper);
        CHECK(result.history.empty());
        CHECK(result.steps == 0);
        CHECK(result.action_energy_ok.empty());
        CHECK_FALSE(result.best_feasible);
    }

    // A short run emits one history row per episode and tracks feasibility.
    {
        DdpgHyper hyper;
        hyper.total_steps = 300;
        hyper.warmup_steps = 100;
        hyper.batch = 16;
        hyper.hidden = 8;
        hyper.t_cap = 2.0;
        RoundEnv env(inst, hyper.xi1, hyper.xi2, hyper.t_cap, hyper.episode_length, false,
                     derive_seed(13, "ddpg-train"));
        DdpgAgent agent(env.state_dim(), env.action_space(hyper.f_floor_frac), hyper,
                        derive_seed(13, "ddpg-agent"));
        auto result = train_ddpg(env, agent, hyper);
        CHECK(result.steps == 300);
        CHECK(result.history.size() == 300);   // episode_length 1
        CHECK(result.action_energy_ok.size() == 300);
        CHECK(result.best_feasible);
        CHECK(std::isfinite(result.best_t));
        CHECK(result.best_t > 0.0);
        REQUIRE(result.best_decision.powers.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(result.best_decision.powers[i] >= 0.0);
            CHECK(result.best_decision.powers[i] <= inst.clients[i].p_max);
            CHECK(result.best_decision.freqs[i] > 0.0);
            CHECK(result.best_decision.freqs[i] <= inst.clients[i].f_max);
        }
        CHECK(result.best_decision.x_p >= 0.0);
        CHECK(result.best_decision.x_p <= inst.geo.length);

        // best_t matches a re-evaluation of the stored decision.
        auto again = evaluate_round(inst, result.best_decision);
        CHECK(again.round_latency == doctest::Approx(result.best_t).epsilon(1e-12));
        CHECK(again.energy_violations == 0);

        // Determinism: identical seeds give identical histories.
        RoundEnv env2(inst, hyper.xi1, hyper.xi2, hyper.t_cap, hyper.episode_length, false,
                      derive_seed(13, "ddpg-train"));
        DdpgAgent agent2(env2.state_dim(), env2.action_space(hyper.f_floor_frac), hyper,
                         derive_seed(13, "ddpg-agent"));
        auto result2 = train_ddpg(env2, agent2, hyper);
        REQUIRE(result2.history.size() == result.history.size());
        for (std::size_t i = 0; i < result.history.size(); ++i)
            CHECK(result2.history[i].mean_reward == result.history[i].mean_reward);
        CHECK(result2.best_t == result.best_t);
    }

    // A tiny divergence cap trips the failure path.
    {
        DdpgHyper hyper;
        hyper.total_steps = 80;
        hyper.warmup_steps = 20;
        hyper.batch = 8;
        hyper.hidden = 8;
        hyper.divergence_cap = 1.0e-15;
        RoundEnv env(inst, hyper.xi1, hyper.xi2, hyper.t_cap, hyper.episode_length, false,
                     derive_seed(13, "ddpg-div"));
        DdpgAgent agent(env.state_dim(), env.action_space(hyper.f_floor_frac), hyper,
                        derive_seed(13, "ddpg-div-agent"));
        CHECK_THROWS_AS(train_ddpg(env, agent, hyper), DivergenceError);
    }
}

TEST_CASE("five-thousand-step smoke run improves the mean reward") {
    RoundInstance inst = small_instance();
    DdpgHyper hyper;
    hyper.total_steps = 5000;
    hyper.warmup_steps = 500;
    hyper.t_cap = 2.0;
    hyper.hidden = 32;
    RoundEnv env(inst, hyper.xi1, hyper.xi2, hyper.t_cap, hyper.episode_length, false,
                 derive_seed(14, "ddpg-smoke"));
    DdpgAgent agent(env.state_dim(), env.action_space(hyper.f_floor_frac), hyper,
                    derive_seed(14, "ddpg-smoke-agent"));
    auto result = train_ddpg(env, agent, hyper);
    REQUIRE(result.history.size() == 5000);

    auto mean_over = [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += result.history[i].mean_reward;
        return s / static_cast<double>(hi - lo);
    };
    double early = mean_over(0, 100);
    double late = mean_over(4900, 5000);
    CHECK(late > early);
    CHECK(result.best_feasible);

    // Late-phase actions should be overwhelmingly energy-feasible.
    std::size_t ok = 0;
    for (std::size_t i = 4500; i < 5000; ++i)
        if (result.action_energy_ok[i]) ++ok;
    CHECK(ok >= 475);   // 95% of the last 500
}
