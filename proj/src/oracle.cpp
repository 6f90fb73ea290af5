#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "csv.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace pinchfl {

const char* baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::OptimizedPlacement: return "optimized";
        case BaselineKind::FixedPlacement: return "fixed";
        case BaselineKind::WithoutPinching: return "wopa";
    }
    return "unknown";
}

void SearchSpec::validate() const {
    if (grid_xp == 0 || grid_power == 0 || grid_freq == 0)
        throw ConfigError("oracle grids need at least one point per dimension");
    if (!(penalty_weight > 0.0)) throw ConfigError("oracle penalty_weight must be positive");
    if (!(t_cap > 0.0)) throw ConfigError("oracle t_cap must be positive");
    if (!(f_floor_frac > 0.0 && f_floor_frac < 1.0))
        throw ConfigError("oracle f_floor_frac must be in (0,1)");
    if (eval_cap == 0) throw ConfigError("oracle eval_cap must be positive");
    if (fixed_xp && !(*fixed_xp >= 0.0)) throw ConfigError("oracle fixed_xp must be nonnegative");
}

namespace {

struct Candidate {
    double key1 = 0.0;    // primary ranking value
    bool feasible = false;
    double t = std::numeric_limits<double>::infinity();
    double excess = std::numeric_limits<double>::infinity();
    std::uint64_t index = 0;
    RoundDecision decision;
    bool valid = false;
};

// Reject mode: feasible points rank by T, infeasible by excess, and every
// feasible point beats every infeasible one.  Penalize mode: single scalar
// min(T, cap) + weight * excess.  Ties fall to the lower grid index.
bool better(const Candidate& a, const Candidate& b) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.feasible != b.feasible) return a.feasible;
    if (a.key1 != b.key1) return a.key1 < b.key1;
    return a.index < b.index;
}

struct GridAxes {
    std::vector<double> xp;
    std::vector<double> power;                // fractions i/G, scaled by p_max per client
    std::vector<double> freq;                 // fractions in [0,1], mapped per client
    std::size_t n = 0;
    bool full = false;
};

double axis_point(std::size_t i, std::size_t count, double lo, double hi) {
    if (count == 1) return hi;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

} // namespace

OracleResult grid_search(const RoundInstance& instance, const SearchSpec& spec) {
    spec.validate();
    instance.validate();
    std::size_t n = instance.size();

    GridAxes axes;
    axes.n = n;
    axes.full = spec.full_grid;
    if (!instance.pinching_enabled) {
        axes.xp = {0.0};
    } else if (spec.fixed_xp) {
        axes.xp = {std::min(*spec.fixed_xp, instance.geo.length)};
    } else {
        for (std::size_t i = 0; i < spec.grid_xp; ++i)
            axes.xp.push_back(axis_point(i, spec.grid_xp, 0.0, instance.geo.length));
        if (spec.grid_xp == 1) axes.xp[0] = instance.geo.length / 2.0;
    }
    // Power levels exclude zero: a silent client has zero rate and infinite
    // latency, which is never optimal and breaks the sentinel-free grid.
    for (std::size_t i = 1; i <= spec.grid_power; ++i)
        axes.power.push_back(static_cast<double>(i) / static_cast<double>(spec.grid_power));
    if (spec.full_grid)
        for (std::size_t i = 0; i < spec.grid_freq; ++i)
            axes.freq.push_back(spec.grid_freq == 1
                                    ? 1.0
                                    : static_cast<double>(i) /
                                          static_cast<double>(spec.grid_freq - 1));

    // Mixed-radix flat index: x_p slowest, then p_0..p_{n-1}, then (full
    // grid) f_0..f_{n-1} with the last dimension fastest.
    std::uint64_t total = axes.xp.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (total > spec.eval_cap / axes.power.size() + 1)
            throw ConfigError("oracle grid exceeds eval_cap; required budget over " +
                              format_u64(spec.eval_cap));
        total *= axes.power.size();
    }
    if (spec.full_grid) {
        for (std::size_t i = 0; i < n; ++i) {
            if (total > spec.eval_cap / axes.freq.size() + 1)
                throw ConfigError("oracle grid exceeds eval_cap; required budget over " +
                                  format_u64(spec.eval_cap));
            total *= axes.freq.size();
        }
    }
    if (total > spec.eval_cap)
        throw ConfigError("oracle grid of " + format_u64(total) +
                          " points exceeds eval_cap " + format_u64(spec.eval_cap));

    auto decode = [&](std::uint64_t flat) {
        RoundDecision d;
        d.powers.resize(n);
        d.freqs.resize(n, 0.0);
        if (spec.full_grid) {
            for (std::size_t i = n; i-- > 0;) {
                std::size_t fi = flat % axes.freq.size();
                flat /= axes.freq.size();
                double f_lo = spec.f_floor_frac * instance.clients[i].f_max;
                d.freqs[i] = f_lo + (instance.clients[i].f_max - f_lo) * axes.freq[fi];
            }
        }
        for (std::size_t i = n; i-- > 0;) {
            std::size_t pi = flat % axes.power.size();
            flat /= axes.power.size();
            d.powers[i] = instance.clients[i].p_max * axes.power[pi];
        }
        d.x_p = axes.xp[flat];
        return d;
    };

    std::uint64_t eval_count_per_point = spec.full_grid ? 1 : 2;

    auto evaluate_candidate = [&](std::uint64_t flat) {
        RoundDecision d = decode(flat);
        if (!spec.full_grid) {
            // Probe rates at f_max (rates do not depend on f), then saturate
            // each client's frequency against its leftover energy budget.
            for (std::size_t i = 0; i < n; ++i) d.freqs[i] = instance.clients[i].f_max;
            RoundMetrics probe = evaluate_round(instance, d);
            for (std::size_t i = 0; i < n; ++i) {
                const ClientProfile& c = instance.clients[i];
                double e_rem = c.e_max - probe.clients[i].e_com;
                double f_lo = spec.f_floor_frac * c.f_max;
                double f_star = f_lo;
                if (e_rem > 0.0) {
                    double work = instance.tau_half * c.cycles * c.samples;
                    // Shave a hair off the budget-saturating root so rounding
                    // cannot tip e_cmp past the budget it was solved for.
                    f_star = std::min(c.f_max, std::sqrt(e_rem / work) * (1.0 - 1.0e-12));
                    f_star = std::max(f_star, f_lo);
                }
                d.freqs[i] = f_star;
            }
        }
        RoundMetrics m = evaluate_round(instance, d);
        Candidate cand;
        cand.valid = true;
        cand.index = flat;
        cand.decision = std::move(d);
        cand.t = m.round_latency;
        cand.excess = m.energy_excess;
        cand.feasible = m.energy_violations == 0 && !m.has_infinite;
        if (spec.mode == FeasibilityMode::Reject) {
            cand.key1 = cand.feasible ? cand.t : cand.excess;
        } else {
            cand.feasible = true;   // penalize mode ranks everything together
            cand.key1 = std::min(cand.t, spec.t_cap) + spec.penalty_weight * cand.excess;
        }
        return cand;
    };

    unsigned threads = std::max(1u, spec.threads);
    Candidate best;
    if (threads == 1 || total < 2 * threads) {
        for (std::uint64_t flat = 0; flat < total; ++flat) {
            Candidate c = evaluate_candidate(flat);
            if (better(c, best)) best = std::move(c);
        }
    } else {
        std::vector<Candidate> partial(threads);
        std::vector<std::thread> pool;
        std::uint64_t chunk = (total + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            std::uint64_t lo = t * chunk;
            std::uint64_t hi = std::min<std::uint64_t>(total, lo + chunk);
            pool.emplace_back([&, lo, hi, t] {
                Candidate local;
                for (std::uint64_t flat = lo; flat < hi; ++flat) {
                    Candidate c = evaluate_candidate(flat);
                    if (better(c, local)) local = std::move(c);
                }
                partial[t] = std::move(local);
            });
        }
        for (auto& th : pool) th.join();
        for (auto& c : partial)
            if (better(c, best)) best = std::move(c);
    }

    OracleResult out;
    out.best = best.decision;
    out.best_t = best.t;
    out.feasible = spec.mode == FeasibilityMode::Reject ? best.feasible
                                                        : best.excess == 0.0;
    out.excess = best.excess;
    out.grid_points = total;
    out.evaluations = total * eval_count_per_point;
    out.instance_hash = instance.hash();
    return out;
}

OracleResult random_search(const RoundInstance& instance, std::size_t samples,
                           const SearchSpec& spec, std::uint64_t seed) {
    spec.validate();
    instance.validate();
    if (samples == 0) throw ConfigError("random search needs at least one sample");
    std::size_t n = instance.size();
    Rng rng(seed);
    Candidate best;
    for (std::uint64_t s = 0; s < samples; ++s) {
        RoundDecision d;
        if (!instance.pinching_enabled)
            d.x_p = 0.0;
        else if (spec.fixed_xp)
            d.x_p = *spec.fixed_xp;
        else
            d.x_p = rng.uniform(0.0, instance.geo.length);
        d.powers.resize(n);
        d.freqs.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const ClientProfile& c = instance.clients[i];
            d.powers[i] = rng.uniform(0.0, c.p_max);
            d.freqs[i] = rng.uniform(spec.f_floor_frac * c.f_max, c.f_max);
        }
        RoundMetrics m = evaluate_round(instance, d);
        Candidate cand;
        cand.valid = true;
        cand.index = s;
        cand.decision = std::move(d);
        cand.t = m.round_latency;
        cand.excess = m.energy_excess;
        cand.feasible = m.energy_violations == 0 && !m.has_infinite;
        if (spec.mode == FeasibilityMode::Reject) {
            cand.key1 = cand.feasible ? cand.t : cand.excess;
        } else {
            cand.feasible = true;
            cand.key1 = std::min(cand.t, spec.t_cap) + spec.penalty_weight * cand.excess;
        }
        if (better(cand, best)) best = std::move(cand);
    }
    OracleResult out;
    out.best = best.decision;
    out.best_t = best.t;
    out.feasible = spec.mode == FeasibilityMode::Reject ? best.feasible
                                                        : best.excess == 0.0;
    out.excess = best.excess;
    out.grid_points = samples;
    out.evaluations = samples;
    out.instance_hash = instance.hash();
    return out;
}

SchemeSetup make_scheme_instance(const RoundInstance& base, BaselineKind kind,
                                 std::optional<double> fixed_xp) {
    SchemeSetup setup;
    setup.instance = base;
    switch (kind) {
        case BaselineKind::OptimizedPlacement:
            setup.has_xp = true;
            setup.fixed_xp = base.geo.length / 2.0;
            break;
        case BaselineKind::FixedPlacement:
            setup.has_xp = false;
            setup.fixed_xp = fixed_xp.value_or(base.geo.length / 2.0);
            break;
        case BaselineKind::WithoutPinching:
            setup.instance.pinching_enabled = false;
            setup.has_xp = false;
            setup.fixed_xp = 0.0;
            break;
    }
    return setup;
}

} // namespace pinchfl
