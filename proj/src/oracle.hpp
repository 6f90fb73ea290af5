#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "noma.hpp"

namespace pinchfl {

enum class FeasibilityMode { Reject, Penalize };

enum class BaselineKind { OptimizedPlacement, FixedPlacement, WithoutPinching };

const char* baseline_name(BaselineKind kind);

// Exhaustive-search specification over the decision box.  The default
// (reduced) mode eliminates the frequency dimensions in closed form: for
// fixed powers the rates are frequency-independent, latency falls and compute
// energy rises monotonically in f_n, so the per-client optimum saturates
// either f_max or the remaining energy budget — f* = min(f_max,
// sqrt(E_rem / (tau_half c_n D_n))).  Full-grid mode enumerates frequencies
// explicitly for small-N verification.
struct SearchSpec {
    std::size_t grid_xp = 9;
    std::size_t grid_power = 5;
    std::size_t grid_freq = 3;                 // full-grid mode only
    bool full_grid = false;
    FeasibilityMode mode = FeasibilityMode::Reject;
    double penalty_weight = 1.0e3;             // penalize mode
    double t_cap = 100.0;                      // penalize mode clip
    double f_floor_frac = 0.01;
    std::uint64_t eval_cap = 10000000;
    std::optional<double> fixed_xp;            // freeze the abscissa (one grid point)
    unsigned threads = 1;

    void validate() const;
};

struct OracleResult {
    RoundDecision best;
    double best_t = 0.0;
    bool feasible = false;
    double excess = 0.0;              // total energy excess at the winner
    std::uint64_t grid_points = 0;
    std::uint64_t evaluations = 0;    // evaluate_round calls
    std::uint64_t instance_hash = 0;
};

// Exhaustive search over the grid; deterministic result for any thread
// count (ties broken by lexicographic grid index).
OracleResult grid_search(const RoundInstance& instance, const SearchSpec& spec);

// Uniform random sampling of the decision box under the same ranking rules.
OracleResult random_search(const RoundInstance& instance, std::size_t samples,
                           const SearchSpec& spec, std::uint64_t seed);

// Scheme variants of an instance: OptimizedPlacement searches the abscissa,
// FixedPlacement freezes it, WithoutPinching swaps the element-served group
// onto server-link gains (its own band) and drops the abscissa.
struct SchemeSetup {
    RoundInstance instance;
    bool has_xp = true;
    double fixed_xp = 0.0;
};

SchemeSetup make_scheme_instance(const RoundInstance& base, BaselineKind kind,
                                 std::optional<double> fixed_xp = std::nullopt);

} // namespace pinchfl
