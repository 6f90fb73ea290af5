#include "fuzzy.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace pinchfl {

const char* category_name(Category c) {
    switch (c) {
        case Category::Discarded: return "discarded";
        case Category::Conventional: return "conventional";
        case Category::Pinching: return "pinching";
    }
    return "unknown";
}

MembershipFunction MembershipFunction::tri(double l, double m, double r, std::string label) {
    MembershipFunction f{l, m, m, r, std::move(label)};
    f.validate();
    return f;
}

MembershipFunction MembershipFunction::trap(double a, double b, double c, double d,
                                            std::string label) {
    MembershipFunction f{a, b, c, d, std::move(label)};
    f.validate();
    return f;
}

double MembershipFunction::degree(double x) const {
    if (x < a || x > d) return 0.0;
    if (x >= b && x <= c) return 1.0;
    if (x < b) return (x - a) / (b - a);
    return (d - x) / (d - c);
}

double MembershipFunction::centroid() const {
    // Piecewise: rising edge, plateau, falling edge.
    double area = 0.0, moment = 0.0;
    if (b > a) {
        area += (b - a) / 2.0;
        moment += (b - a) * (a + 2.0 * b) / 6.0;
    }
    if (c > b) {
        area += c - b;
        moment += (c * c - b * b) / 2.0;
    }
    if (d > c) {
        area += (d - c) / 2.0;
        moment += (d - c) * (d + 2.0 * c) / 6.0;
    }
    if (area == 0.0) return a;   // degenerate spike
    return moment / area;
}

void MembershipFunction::validate() const {
    if (!(0.0 <= a && a <= b && b <= c && c <= d && d <= 1.0))
        throw ConfigError("membership function '" + label +
                          "' breakpoints must be nondecreasing within [0,1]");
}

void validate_family_coverage(const MembershipFamily& family, const std::string& name) {
    for (const auto& f : family) f.validate();
    constexpr int kProbe = 1001;
    for (int i = 0; i < kProbe; ++i) {
        double x = static_cast<double>(i) / (kProbe - 1);
        double best = 0.0;
        for (const auto& f : family) best = std::max(best, f.degree(x));
        if (!(best > 0.0))
            throw ConfigError("membership family '" + name + "' leaves a dead zone near x=" +
                              std::to_string(x));
    }
}

RuleTable RuleTable::defaults() {
    RuleTable t;
    // Rows: DC low / moderate / high; columns: CQ weak / medium / strong.
    t.cell[0] = {Category::Discarded, Category::Discarded, Category::Conventional};
    t.cell[1] = {Category::Discarded, Category::Conventional, Category::Conventional};
    t.cell[2] = {Category::Pinching, Category::Pinching, Category::Pinching};
    return t;
}

FuzzyParams FuzzyParams::defaults() {
    FuzzyParams p;
    p.cq = {MembershipFunction::tri(0.0, 0.0, 0.5, "weak"),
            MembershipFunction::tri(0.0, 0.5, 1.0, "medium"),
            MembershipFunction::tri(0.5, 1.0, 1.0, "strong")};
    p.dc = {MembershipFunction::tri(0.0, 0.0, 0.5, "low"),
            MembershipFunction::tri(0.0, 0.5, 1.0, "moderate"),
            MembershipFunction::tri(0.5, 1.0, 1.0, "high")};
    p.out = {MembershipFunction::tri(0.0, 1.0 / 6.0, 1.0 / 3.0, "discarded"),
             MembershipFunction::tri(1.0 / 3.0, 0.5, 2.0 / 3.0, "conventional"),
             MembershipFunction::tri(2.0 / 3.0, 5.0 / 6.0, 1.0, "pinching")};
    p.rules = RuleTable::defaults();
    p.cog_grid = 10001;
    return p;
}

void FuzzyParams::validate() const {
    validate_family_coverage(cq, "cq");
    validate_family_coverage(dc, "dc");
    for (const auto& f : out) f.validate();
    if (cog_grid < 2) throw ConfigError("fuzzy.cog_grid must be at least 2");
}

double data_contribution(const ClientProfile& client) {
    return client.dc_scale - client.dc_coeff * std::exp(-client.dc_rate * client.samples);
}

std::array<double, 3> fuzzify(double value, const MembershipFamily& family) {
    if (!(value >= 0.0 && value <= 1.0))
        throw ConfigError("fuzzify input outside [0,1]; inputs must be normalized");
    return {family[0].degree(value), family[1].degree(value), family[2].degree(value)};
}

std::array<double, 3> infer(const std::array<double, 3>& cq_degrees,
                            const std::array<double, 3>& dc_degrees, const RuleTable& rules,
                            RuleActivations* trace) {
    std::array<double, 3> strengths{0.0, 0.0, 0.0};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            double s = std::min(dc_degrees[r], cq_degrees[c]);
            if (trace) trace->strength[r][c] = s;
            int out_idx = static_cast<int>(rules.cell[r][c]);
            strengths[out_idx] = std::max(strengths[out_idx], s);
        }
    }
    return strengths;
}

std::optional<double> defuzzify_cog(const std::array<double, 3>& strengths,
                                    const MembershipFamily& out, int grid) {
    if (grid < 2) throw ConfigError("cog grid must be at least 2");
    double num = 0.0, den = 0.0;
    for (int i = 0; i < grid; ++i) {
        double x = static_cast<double>(i) / (grid - 1);
        double f = 0.0;
        for (int t = 0; t < 3; ++t)
            f = std::max(f, std::min(strengths[t], out[t].degree(x)));
        num += x * f;
        den += f;
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
}

namespace {

Category nearest_category(double no_star, const MembershipFamily& out) {
    double best = std::abs(no_star - out[0].centroid());
    int idx = 0;
    for (int t = 1; t < 3; ++t) {
        double dist = std::abs(no_star - out[t].centroid());
        if (dist < best) {
            best = dist;
            idx = t;
        }
    }
    return static_cast<Category>(idx);
}

} // namespace

SelectionResult classify_and_select(const std::vector<ClientProfile>& profiles,
                                    const std::vector<double>& gains, std::size_t K,
                                    std::size_t N, const FuzzyParams& params) {
    params.validate();
    std::size_t m = profiles.size();
    if (gains.size() != m) throw ConfigError("gain vector size does not match population");
    if (N > m) throw ConfigError("selection size N exceeds population M");
    if (K > N) throw ConfigError("conventional count K exceeds selection size N");

    double max_gain = 0.0, max_dc = 0.0;
    std::vector<double> dcs(m);
    for (std::size_t i = 0; i < m; ++i) {
        dcs[i] = data_contribution(profiles[i]);
        max_gain = std::max(max_gain, gains[i]);
        max_dc = std::max(max_dc, dcs[i]);
    }

    SelectionResult result;
    result.outcomes.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        ClassificationOutcome& o = result.outcomes[i];
        o.id = profiles[i].id;
        o.cq_norm = max_gain > 0.0 ? gains[i] / max_gain : 0.0;
        o.dc_norm = max_dc > 0.0 ? dcs[i] / max_dc : 0.0;
        auto cq_deg = fuzzify(o.cq_norm, params.cq);
        auto dc_deg = fuzzify(o.dc_norm, params.dc);
        auto strengths = infer(cq_deg, dc_deg, params.rules, &o.trace);
        auto no_star = defuzzify_cog(strengths, params.out, params.cog_grid);
        if (no_star) {
            o.no_star = *no_star;
            o.category = nearest_category(o.no_star, params.out);
            o.rule_fired = true;
        } else {
            o.no_star = 0.0;
            o.category = Category::Discarded;
            o.rule_fired = false;
        }
    }

    // Rank within a category by crisp output descending, ties by id ascending.
    auto ranked = [&](Category cat) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < m; ++i)
            if (result.outcomes[i].category == cat) idx.push_back(i);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (result.outcomes[a].no_star != result.outcomes[b].no_star)
                return result.outcomes[a].no_star > result.outcomes[b].no_star;
            return result.outcomes[a].id < result.outcomes[b].id;
        });
        return idx;
    };

    auto conv_rank = ranked(Category::Conventional);
    auto pinch_rank = ranked(Category::Pinching);
    std::vector<std::size_t> conv_sel(conv_rank.begin(),
                                      conv_rank.begin() +
                                          std::min<std::size_t>(K, conv_rank.size()));
    std::size_t pinch_quota = N - K;
    std::vector<std::size_t> pinch_sel(pinch_rank.begin(),
                                       pinch_rank.begin() +
                                           std::min<std::size_t>(pinch_quota, pinch_rank.size()));

    // Shortfall: draw from every unselected client, best crisp output first,
    // conventional slots before element-served slots.
    std::vector<bool> taken(m, false);
    for (std::size_t i : conv_sel) taken[i] = true;
    for (std::size_t i : pinch_sel) taken[i] = true;
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < m; ++i)
        if (!taken[i]) pool.push_back(i);
    std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
        if (result.outcomes[a].no_star != result.outcomes[b].no_star)
            return result.outcomes[a].no_star > result.outcomes[b].no_star;
        return result.outcomes[a].id < result.outcomes[b].id;
    });
    std::size_t cursor = 0;
    while (conv_sel.size() < K && cursor < pool.size()) conv_sel.push_back(pool[cursor++]);
    while (pinch_sel.size() < pinch_quota && cursor < pool.size())
        pinch_sel.push_back(pool[cursor++]);

    for (std::size_t i : conv_sel) {
        result.outcomes[i].selected = true;
        result.conventional.push_back(result.outcomes[i].id);
    }
    for (std::size_t i : pinch_sel) {
        result.outcomes[i].selected = true;
        result.pinching.push_back(result.outcomes[i].id);
    }
    for (std::size_t i = 0; i < m; ++i)
        if (!result.outcomes[i].selected) result.discarded.push_back(result.outcomes[i].id);
    return result;
}

} // namespace pinchfl
