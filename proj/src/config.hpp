#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "channel.hpp"
#include "ddpg.hpp"
#include "fuzzy.hpp"
#include "geometry.hpp"
#include "oracle.hpp"

namespace pinchfl {

// Whole-experiment configuration: six blocks (geometry, population, fuzzy,
// solver, fl, seeds) with every key defaulted, unknown keys rejected with
// their dotted path, and a canonical serialization whose parse round-trips
// exactly.
struct ExperimentConfig {
    // geometry
    NetworkGeometry geometry;

    // population
    std::size_t count = 30;          // M
    std::size_t select = 6;          // N
    std::size_t conventional = 3;    // K
    bool fading = false;
    ClientDefaults defaults;         // dc_* mirrored from the fuzzy block
    double tau_half = 1.0e-28;

    // fuzzy: membership breakpoints as [l,m,r] triangles or [a,b,c,d]
    // trapezoids over [0,1]
    std::vector<double> cq_weak{0.0, 0.0, 0.5};
    std::vector<double> cq_medium{0.0, 0.5, 1.0};
    std::vector<double> cq_strong{0.5, 1.0, 1.0};
    std::vector<double> dc_low{0.0, 0.0, 0.5};
    std::vector<double> dc_moderate{0.0, 0.5, 1.0};
    std::vector<double> dc_high{0.5, 1.0, 1.0};
    std::vector<double> out_discarded{0.0, 1.0 / 6.0, 1.0 / 3.0};
    std::vector<double> out_conventional{1.0 / 3.0, 0.5, 2.0 / 3.0};
    std::vector<double> out_pinching{2.0 / 3.0, 5.0 / 6.0, 1.0};
    double dc_scale = 1.0;
    double dc_coeff = 1.0;
    double dc_rate = 0.0;            // 0 = auto (3 / max dataset size)
    int cog_grid = 10001;

    // solver
    DdpgHyper hyper;
    std::size_t grid_xp = 9;
    std::size_t grid_power = 5;
    std::size_t grid_freq = 3;
    bool full_grid = false;
    std::string feasibility = "reject";
    double penalty_weight = 1.0e3;
    std::uint64_t eval_cap = 10000000;
    double fixed_xp = -1.0;          // < 0 = midpoint of the waveguide

    // fl
    std::size_t fl_rounds = 100;
    double fl_lr = 0.1;
    double alpha_skew = 0.5;
    std::size_t total_samples = 20000;
    std::size_t classes = 10;
    std::size_t features = 32;
    double mean_scale = 0.5;
    double task_noise = 1.0;
    std::size_t test_samples = 2000;
    double budget_s = 0.0;           // > 0 switches run-fl to wall-clock budget mode
    std::string scheme = "optimized";
    std::string fl_solver = "oracle";

    // seeds
    std::uint64_t master_seed = 1;

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);

    std::string to_json_text() const;   // canonical (sorted keys, full precision)
    void apply_override(const std::string& dotted_key, const std::string& value);
    void validate() const;
    std::uint64_t hash() const;

    FuzzyParams fuzzy_params() const;
    ClientDefaults client_defaults() const;   // with dc_* mirrored in
    SearchSpec search_spec(unsigned threads) const;
    BaselineKind scheme_kind() const;
    double resolved_fixed_xp() const;
};

} // namespace pinchfl
