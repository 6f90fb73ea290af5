#include "noma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csv.hpp"
#include "errors.hpp"

namespace pinchfl {

void NomaGroup::validate() const {
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i].power < 0.0) throw ConfigError("noma member power negative");
        if (members[i].gain < 0.0) throw ConfigError("noma member gain negative");
        if (i > 0) {
            const auto& prev = members[i - 1];
            const auto& cur = members[i];
            bool ordered = prev.gain > cur.gain ||
                           (prev.gain == cur.gain && prev.id < cur.id);
            if (!ordered) throw ConfigError("noma group violates gain-descending decode order");
        }
    }
    if (!(bandwidth > 0.0)) throw ConfigError("noma bandwidth must be positive");
    if (!(noise > 0.0)) throw ConfigError("noma noise power must be positive");
}

NomaGroup make_sorted_group(std::vector<NomaMember> members, double bandwidth, double noise) {
    std::sort(members.begin(), members.end(), [](const NomaMember& a, const NomaMember& b) {
        if (a.gain != b.gain) return a.gain > b.gain;
        return a.id < b.id;
    });
    return NomaGroup{std::move(members), bandwidth, noise};
}

std::vector<double> sic_rates(const NomaGroup& group) {
    if (group.members.empty()) throw ConfigError("noma group is empty");
    group.validate();
    std::size_t n = group.members.size();
    std::vector<double> rates(n);
    // Decode strongest-first: member i sees everything after it as
    // interference.  Suffix sums (no subtraction) keep the small interference
    // of dominant members exact, so the sum-rate telescopes to fp precision.
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;)
        suffix[i] = suffix[i + 1] + group.members[i].power * group.members[i].gain;
    for (std::size_t i = 0; i < n; ++i) {
        double own = group.members[i].power * group.members[i].gain;
        rates[i] = group.bandwidth * std::log2(1.0 + own / (suffix[i + 1] + group.noise));
    }
    return rates;
}

ComputeCost compute_cost(const ClientProfile& client, double f_n, double tau_half) {
    if (!(f_n > 0.0)) throw ConfigError("cpu frequency must be positive");
    double work = client.cycles * client.samples;
    return ComputeCost{work / f_n, tau_half * work * f_n * f_n};
}

CommCost comm_cost(const ClientProfile& client, double rate, double p_n) {
    if (client.upload_bits == 0.0) return CommCost{0.0, 0.0, false};
    if (rate <= 0.0) {
        // Absolute straggler: infinite latency; energy stays 0 for p = 0.
        double e = (p_n == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
        return CommCost{std::numeric_limits<double>::infinity(), e, true};
    }
    double t = client.upload_bits / rate;
    return CommCost{t, p_n * t, false};
}

void RoundInstance::validate() const {
    geo.validate();
    if (clients.empty()) throw ConfigError("round instance has no clients");
    if (num_conventional > clients.size())
        throw ConfigError("num_conventional exceeds client count");
    if (conv_gain.size() != clients.size())
        throw ConfigError("conv_gain size does not match client count");
    if (!(tau_half > 0.0)) throw ConfigError("tau_half must be positive");
}

std::uint64_t RoundInstance::hash() const {
    std::string repr;
    auto add = [&repr](double v) {
        repr += format_double(v);
        repr += '|';
    };
    add(geo.length);
    add(geo.width);
    add(geo.waveguide_height);
    add(geo.carrier_hz);
    add(geo.bandwidth_hz);
    add(geo.noise_psd_dbm);
    add(geo.pathloss_exp);
    repr += format_u64(num_conventional);
    repr += '|';
    repr += pinching_enabled ? '1' : '0';
    repr += '|';
    add(tau_half);
    for (std::size_t i = 0; i < clients.size(); ++i) {
        const auto& c = clients[i];
        repr += format_u64(c.id);
        repr += '|';
        add(c.x);
        add(c.y);
        add(c.samples);
        add(c.cycles);
        add(c.f_max);
        add(c.p_max);
        add(c.e_max);
        add(c.upload_bits);
        add(conv_gain[i]);
    }
    return fnv1a64(repr);
}

RoundMetrics evaluate_round(const RoundInstance& instance, const RoundDecision& decision) {
    instance.validate();
    std::size_t n = instance.size();
    if (decision.powers.size() != n || decision.freqs.size() != n)
        throw ConfigError("decision dimensions do not match instance");

    // Per-client gain under this decision: conventional group keeps the fixed
    // server-link gain; the second group sees the element at x_p unless the
    // no-element benchmark swapped it for server-link gains.
    std::vector<double> gains(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < instance.num_conventional || !instance.pinching_enabled)
            gains[i] = instance.conv_gain[i];
        else
            gains[i] = pinching_gain(instance.geo, instance.clients[i].position(), decision.x_p);
    }

    // OFDMA: the two groups occupy orthogonal bands, so rates are computed
    // independently per group.
    std::vector<double> rates(n, 0.0);
    double noise = instance.geo.noise_power();
    auto fill_group = [&](std::size_t begin, std::size_t end) {
        if (begin >= end) return;
        std::vector<std::size_t> order;   // client indices in decode order
        for (std::size_t i = begin; i < end; ++i) order.push_back(i);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (gains[a] != gains[b]) return gains[a] > gains[b];
            return instance.clients[a].id < instance.clients[b].id;
        });
        std::vector<NomaMember> members;
        members.reserve(order.size());
        for (std::size_t i : order)
            members.push_back(NomaMember{instance.clients[i].id, gains[i], decision.powers[i]});
        NomaGroup group{std::move(members), instance.geo.bandwidth_hz, noise};
        std::vector<double> r = sic_rates(group);
        for (std::size_t m = 0; m < order.size(); ++m) rates[order[m]] = r[m];
    };
    fill_group(0, instance.num_conventional);
    fill_group(instance.num_conventional, n);

    RoundMetrics out;
    out.clients.resize(n);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const ClientProfile& c = instance.clients[i];
        ClientMetrics& m = out.clients[i];
        m.id = c.id;
        m.rate = rates[i];
        ComputeCost cc = compute_cost(c, decision.freqs[i], instance.tau_half);
        CommCost mc = comm_cost(c, rates[i], decision.powers[i]);
        m.t_cmp = cc.t_cmp;
        m.e_cmp = cc.e_cmp;
        m.t_com = mc.t_com;
        m.e_com = mc.e_com;
        m.infinite_latency = mc.infinite;
        double e_total = m.e_cmp + m.e_com;
        m.energy_ok = e_total <= c.e_max;
        m.power_ok = decision.powers[i] >= 0.0 && decision.powers[i] <= c.p_max;
        m.freq_ok = decision.freqs[i] > 0.0 && decision.freqs[i] <= c.f_max;
        if (!m.energy_ok) {
            ++out.energy_violations;
            out.energy_excess += e_total - c.e_max;
        }
        if (m.infinite_latency) out.has_infinite = true;
        worst = std::max(worst, m.t_cmp + m.t_com);
    }
    out.round_latency = out.has_infinite ? std::numeric_limits<double>::infinity() : worst;
    return out;
}

} // namespace pinchfl
