#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace pinchfl {

enum class Category : int { Discarded = 0, Conventional = 1, Pinching = 2 };

const char* category_name(Category c);

// Trapezoid (a <= b <= c <= d) over [0,1]; triangles have b == c.
struct MembershipFunction {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    std::string label;

    static MembershipFunction tri(double l, double m, double r, std::string label);
    static MembershipFunction trap(double a, double b, double c, double d, std::string label);

    double degree(double x) const;
    double centroid() const;   // analytic centroid of the full (unclipped) shape
    void validate() const;
};

// Three-term linguistic family covering [0,1] with no dead zones.
using MembershipFamily = std::array<MembershipFunction, 3>;

void validate_family_coverage(const MembershipFamily& family, const std::string& name);

// rule[dc_term][cq_term] -> output category; dc terms are {low, moderate,
// high}, cq terms are {weak, medium, strong}.
struct RuleTable {
    std::array<std::array<Category, 3>, 3> cell{};

    static RuleTable defaults();
};

// Firing strength min(dc_degree, cq_degree) of each of the 9 rules.
struct RuleActivations {
    std::array<std::array<double, 3>, 3> strength{};
};

struct FuzzyParams {
    MembershipFamily cq;    // weak, medium, strong
    MembershipFamily dc;    // low, moderate, high
    MembershipFamily out;   // discarded, conventional, pinching
    RuleTable rules;
    int cog_grid = 10001;

    static FuzzyParams defaults();
    void validate() const;
};

// DC = dc_scale - dc_coeff * exp(-dc_rate * D_n): saturating contribution of
// a client's dataset size.
double data_contribution(const ClientProfile& client);

// Per-term membership degrees of a normalized input.
std::array<double, 3> fuzzify(double value, const MembershipFamily& family);

// Max-Min inference: strength(category) = max over rules mapping to it of
// min(dc_degree, cq_degree).  Optional trace receives all 9 rule strengths.
std::array<double, 3> infer(const std::array<double, 3>& cq_degrees,
                            const std::array<double, 3>& dc_degrees, const RuleTable& rules,
                            RuleActivations* trace = nullptr);

// Center-of-gravity of the aggregated clipped output memberships on a uniform
// grid over [0,1]; empty when no rule fired.
std::optional<double> defuzzify_cog(const std::array<double, 3>& strengths,
                                    const MembershipFamily& out, int grid);

struct ClassificationOutcome {
    std::uint32_t id = 0;
    double cq_norm = 0.0;
    double dc_norm = 0.0;
    double no_star = 0.0;
    Category category = Category::Discarded;
    bool rule_fired = false;
    bool selected = false;
    RuleActivations trace;
};

struct SelectionResult {
    std::vector<ClassificationOutcome> outcomes;   // aligned with input profiles
    std::vector<std::uint32_t> conventional;       // K ids in rank order
    std::vector<std::uint32_t> pinching;           // N-K ids in rank order
    std::vector<std::uint32_t> discarded;          // everyone else, id ascending
};

// Classify all M clients from (server-link gain, dataset size) and pick K
// conventional + N-K element-served participants; shortfalls are filled from
// the unselected pool ranked by crisp output.
SelectionResult classify_and_select(const std::vector<ClientProfile>& profiles,
                                    const std::vector<double>& gains, std::size_t K,
                                    std::size_t N, const FuzzyParams& params);

} // namespace pinchfl
