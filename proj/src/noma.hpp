#pragma once

#include <cstdint>
#include <vector>

#include "channel.hpp"
#include "geometry.hpp"

namespace pinchfl {

struct NomaMember {
    std::uint32_t id = 0;
    double gain = 0.0;    // power gain |h|^2
    double power = 0.0;   // transmit power, W
};

// Uplink NOMA group decoded by SIC in gain-descending order.
struct NomaGroup {
    std::vector<NomaMember> members;   // sorted: gain desc, ties by id asc
    double bandwidth = 0.0;            // Hz
    double noise = 0.0;                // W over this band

    void validate() const;   // throws on ordering violation or negative power
};

NomaGroup make_sorted_group(std::vector<NomaMember> members, double bandwidth, double noise);

// rate_n = B log2(1 + p_n g_n / (sum_{j>n} p_j g_j + sigma^2)), aligned with members.
std::vector<double> sic_rates(const NomaGroup& group);

struct ComputeCost {
    double t_cmp = 0.0;
    double e_cmp = 0.0;
};

struct CommCost {
    double t_com = 0.0;
    double e_com = 0.0;
    bool infinite = false;   // rate 0 with a nonzero payload
};

// t_cmp = c_n D_n / f_n; e_cmp = tau_half * c_n * D_n * f_n^2.  f_n must be > 0.
ComputeCost compute_cost(const ClientProfile& client, double f_n, double tau_half);

// t_com = d_n / rate, e_com = p_n t_com.  d_n = 0 gives (0, 0); rate = 0 with
// d_n > 0 gives the infinite-latency sentinel (e_com = 0 when p_n = 0).
CommCost comm_cost(const ClientProfile& client, double rate, double p_n);

// One round's decision variables: element position plus per-client power and
// CPU frequency, aligned with RoundInstance::clients.
struct RoundDecision {
    double x_p = 0.0;
    std::vector<double> powers;
    std::vector<double> freqs;
};

struct ClientMetrics {
    std::uint32_t id = 0;
    double rate = 0.0;
    double t_cmp = 0.0;
    double t_com = 0.0;
    double e_cmp = 0.0;
    double e_com = 0.0;
    bool infinite_latency = false;
    bool energy_ok = true;   // e_cmp + e_com <= E_max
    bool power_ok = true;    // 0 <= p_n <= p_max
    bool freq_ok = true;     // 0 < f_n <= f_max
};

struct RoundMetrics {
    std::vector<ClientMetrics> clients;
    double round_latency = 0.0;        // max_n (t_cmp + t_com); +inf with sentinel
    bool has_infinite = false;
    std::size_t energy_violations = 0;
    double energy_excess = 0.0;        // sum of max(0, e_total - E_max)

    bool all_energy_ok() const { return energy_violations == 0; }
};

// A frozen single-round optimization instance: the selected clients with the
// conventional group first (indices 0..num_conventional-1) and the
// element-served group after.  With pinching disabled the second group falls
// back to conventional server-link gains on its own band (the no-element
// benchmark) and x_p is ignored.
struct RoundInstance {
    NetworkGeometry geo;
    std::vector<ClientProfile> clients;
    std::size_t num_conventional = 0;
    std::vector<double> conv_gain;     // server-link |h|^2 per client, size N
    bool pinching_enabled = true;
    double tau_half = 1.0e-28;

    std::size_t size() const { return clients.size(); }
    void validate() const;
    std::uint64_t hash() const;
};

RoundMetrics evaluate_round(const RoundInstance& instance, const RoundDecision& decision);

} // namespace pinchfl
