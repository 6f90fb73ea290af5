#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "channel.hpp"
#include "errors.hpp"
#include "noma.hpp"
#include "rng.hpp"

using namespace pinchfl;

namespace {

NetworkGeometry default_geo() {
    NetworkGeometry g;
    g.validate();
    return g;
}

ClientProfile basic_client(std::uint32_t id) {
    ClientProfile c;
    c.id = id;
    c.samples = 1000;
    c.cycles = 2.0e4;
    c.f_max = 2.0e9;
    c.p_max = 0.2;
    c.e_max = 1.0;
    c.upload_bits = 1.0e6;
    return c;
}

}  // namespace

TEST_CASE("single member rate with unit SNR") {
    NomaGroup g{{{0, 2.0e-9, 0.5}}, 1.0e6, 1.0e-9};  // p*g = sigma^2
    auto r = sic_rates(g);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(1.0e6).epsilon(1e-12));  // B*log2(2) = B
}

TEST_CASE("two members with equal received power") {
    const double B = 1.0e6, noise = 1.0e-9;
    // both p*g = sigma^2; decode order by gain desc
    NomaGroup g{{{0, 4.0e-9, 0.25}, {1, 2.0e-9, 0.5}}, B, noise};
    auto r = sic_rates(g);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(B * std::log2(1.5)).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(B * std::log2(2.0)).epsilon(1e-12));
}

TEST_CASE("SIC sum-rate telescopes for random groups") {
    Rng rng(404);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_int(0, 5));
        std::vector<NomaMember> members;
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double gain = std::pow(10.0, rng.uniform(-9.0, -5.0));
            double power = rng.uniform(0.0, 0.2);
            members.push_back({static_cast<std::uint32_t>(i), gain, power});
            total += gain * power;
        }
        double noise = std::pow(10.0, rng.uniform(-15.0, -11.0));
        NomaGroup g = make_sorted_group(members, 1.0e6, noise);
        auto rates = sic_rates(g);
        double sum = 0.0;
        for (double r : rates) sum += r;
        double expect = 1.0e6 * std::log2(1.0 + total / noise);
        CHECK(std::abs(sum - expect) <= 1e-9 * std::max(expect, 1.0));
    }
}

TEST_CASE("rate is zero iff power is zero") {
    NomaGroup g{{{0, 4.0e-9, 0.0}, {1, 2.0e-9, 0.5}}, 1.0e6, 1.0e-9};
    auto r = sic_rates(g);
    CHECK(r[0] == 0.0);
    CHECK(r[1] > 0.0);
}

TEST_CASE("unsorted group is rejected") {
    NomaGroup bad{{{0, 1.0e-9, 0.1}, {1, 2.0e-9, 0.1}}, 1.0e6, 1.0e-9};
    CHECK_THROWS_AS(sic_rates(bad), ConfigError);
    // equal gains must be ordered by ascending id
    NomaGroup tie_bad{{{3, 1.0e-9, 0.1}, {2, 1.0e-9, 0.1}}, 1.0e6, 1.0e-9};
    CHECK_THROWS_AS(sic_rates(tie_bad), ConfigError);
    NomaGroup tie_ok{{{2, 1.0e-9, 0.1}, {3, 1.0e-9, 0.1}}, 1.0e6, 1.0e-9};
    CHECK_NOTHROW(sic_rates(tie_ok));
}

TEST_CASE("make_sorted_group orders by gain desc then id asc") {
    auto g = make_sorted_group({{5, 1.0e-9, 0.1}, {2, 3.0e-9, 0.1}, {4, 3.0e-9, 0.1}},
                               1.0e6, 1.0e-9);
    REQUIRE(g.members.size() == 3);
    CHECK(g.members[0].id == 2);
    CHECK(g.members[1].id == 4);
    CHECK(g.members[2].id == 5);
}

TEST_CASE("raising a power helps itself and hurts earlier decodes") {
    const double B = 1.0e6, noise = 1.0e-9;
    std::vector<NomaMember> base{{0, 8.0e-9, 0.10}, {1, 4.0e-9, 0.10}, {2, 1.0e-9, 0.10}};
    auto r0 = sic_rates(NomaGroup{base, B, noise});
    for (double bump : {0.11, 0.15, 0.2}) {
        auto mod = base;
        mod[2].power = bump;  // last decoded
        auto r1 = sic_rates(NomaGroup{mod, B, noise});
        CHECK(r1[2] >= r0[2]);   // own rate never decreases
        CHECK(r1[0] <= r0[0]);   // decoded-before rates never increase
        CHECK(r1[1] <= r0[1]);
    }
}

TEST_CASE("compute cost hand values") {
    ClientProfile c = basic_client(0);
    c.cycles = 1.0e4;
    c.samples = 500;
    auto cc = compute_cost(c, 1.0e9, 1.0e-28);
    CHECK(cc.t_cmp == doctest::Approx(5.0e-3).epsilon(1e-12));
    // e_cmp = tau/2 * c D * f^2 = 1e-28 * 5e6 * 1e18 = 5e-4
    CHECK(cc.e_cmp == doctest::Approx(5.0e-4).epsilon(1e-12));

    auto cc2 = compute_cost(c, 2.0e9, 1.0e-28);
    CHECK(cc2.t_cmp == doctest::Approx(cc.t_cmp / 2.0).epsilon(1e-12));
    CHECK(cc2.e_cmp == doctest::Approx(cc.e_cmp * 4.0).epsilon(1e-12));

    CHECK_THROWS_AS(compute_cost(c, 0.0, 1.0e-28), ConfigError);
}

TEST_CASE("comm cost hand values and sentinels") {
    ClientProfile c = basic_client(0);
    auto mc = comm_cost(c, 1.0e6, 0.1);
    CHECK(mc.t_com == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mc.e_com == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_FALSE(mc.infinite);

    c.upload_bits = 0.0;
    auto empty = comm_cost(c, 1.0e6, 0.1);
    CHECK(empty.t_com == 0.0);
    CHECK(empty.e_com == 0.0);

    c.upload_bits = 1.0e6;
    auto dead = comm_cost(c, 0.0, 0.1);
    CHECK(dead.infinite);
    CHECK(std::isinf(dead.t_com));
    CHECK(std::isinf(dead.e_com));
    auto dead_unpowered = comm_cost(c, 0.0, 0.0);
    CHECK(dead_unpowered.infinite);
    CHECK(dead_unpowered.e_com == 0.0);
}

TEST_CASE("symmetric two-group round collapses to a single client's cost") {
    NetworkGeometry geo = default_geo();
    double eta = geo.pathloss_const();
    RoundInstance inst;
    inst.geo = geo;
    ClientProfile conv = basic_client(0);
    conv.x = 10.0;
    conv.y = 0.0;
    ClientProfile pin = basic_client(1);
    pin.x = 20.0;  // directly under the element when x_p = 20
    pin.y = 0.0;
    inst.clients = {conv, pin};
    inst.num_conventional = 1;
    // force the conventional gain equal to the overhead pinching gain
    inst.conv_gain = {eta * eta / 9.0, eta * eta * std::pow(20.0, -2.4)};

    RoundDecision d;
    d.x_p = 20.0;
    d.powers = {0.1, 0.1};
    d.freqs = {1.0e9, 1.0e9};
    auto m = evaluate_round(inst, d);
    REQUIRE(m.clients.size() == 2);
    CHECK(m.clients[0].rate == doctest::Approx(m.clients[1].rate).epsilon(1e-12));
    double single = m.clients[0].t_cmp + m.clients[0].t_com;
    CHECK(m.round_latency == doctest::Approx(single).epsilon(1e-12));
}

TEST_CASE("zero-power straggler flags infinite latency") {
    NetworkGeometry geo = default_geo();
    RoundInstance inst;
    inst.geo = geo;
    inst.clients = {basic_client(0), basic_client(1)};
    inst.clients[0].x = 5.0;
    inst.clients[1].x = 6.0;
    inst.num_conventional = 2;  // both on the conventional band
    inst.conv_gain = {1.0e-7, 2.0e-7};

    RoundDecision d;
    d.x_p = 0.0;
    d.powers = {0.0, 0.1};
    d.freqs = {1.0e9, 1.0e9};
    auto m = evaluate_round(inst, d);
    CHECK(m.has_infinite);
    CHECK(std::isinf(m.round_latency));
    CHECK(m.clients[0].infinite_latency);
    CHECK_FALSE(m.clients[1].infinite_latency);
}

TEST_CASE("OFDMA isolation between the two groups") {
    NetworkGeometry geo = default_geo();
    RoundInstance inst;
    inst.geo = geo;
    for (std::uint32_t i = 0; i < 4; ++i) {
        ClientProfile c = basic_client(i);
        c.x = 4.0 + 3.0 * i;
        c.y = (i % 2 == 0) ? 1.0 : -2.0;
        inst.clients.push_back(c);
    }
    inst.num_conventional = 2;
    inst.conv_gain = {3.0e-7, 1.0e-7, 8.0e-8, 5.0e-8};

    RoundDecision d;
    d.x_p = 9.0;
    d.powers = {0.10, 0.15, 0.05, 0.20};
    d.freqs = {1.0e9, 1.5e9, 2.0e9, 1.0e9};
    auto before = evaluate_round(inst, d);

    d.powers[0] = 0.02;  // conventional-group change
    d.powers[1] = 0.20;
    auto after = evaluate_round(inst, d);
    CHECK(after.clients[2].rate == before.clients[2].rate);
    CHECK(after.clients[3].rate == before.clients[3].rate);
    CHECK(after.clients[0].rate != before.clients[0].rate);

    d.powers = {0.10, 0.15, 0.01, 0.04};  // pinching-group change
    auto third = evaluate_round(inst, d);
    CHECK(third.clients[0].rate == before.clients[0].rate);
    CHECK(third.clients[1].rate == before.clients[1].rate);
}

TEST_CASE("round latency invariant under within-group relabeling") {
    NetworkGeometry geo = default_geo();
    RoundInstance a;
    a.geo = geo;
    for (std::uint32_t i = 0; i < 3; ++i) {
        ClientProfile c = basic_client(i);
        c.x = 5.0 + 2.0 * i;
        c.y = 1.0;
        a.clients.push_back(c);
    }
    a.num_conventional = 3;
    a.conv_gain = {3.0e-7, 1.0e-7, 6.0e-8};
    RoundDecision da;
    da.powers = {0.10, 0.15, 0.20};
    da.freqs = {1.0e9, 1.2e9, 1.4e9};

    // permute clients 0<->2 together with their gains/powers/freqs
    RoundInstance b = a;
    std::swap(b.clients[0], b.clients[2]);
    std::swap(b.conv_gain[0], b.conv_gain[2]);
    RoundDecision db = da;
    std::swap(db.powers[0], db.powers[2]);
    std::swap(db.freqs[0], db.freqs[2]);

    auto ma = evaluate_round(a, da);
    auto mb = evaluate_round(b, db);
    CHECK(ma.round_latency == doctest::Approx(mb.round_latency).epsilon(1e-14));
    CHECK(ma.clients[0].rate == doctest::Approx(mb.clients[2].rate).epsilon(1e-14));
    CHECK(ma.clients[2].rate == doctest::Approx(mb.clients[0].rate).epsilon(1e-14));
}

TEST_CASE("evaluate_round matches an independent step-by-step evaluation") {
    // Build a seeded 3 + 3 instance through the real generators, then verify
    // T against a from-scratch reimplementation of the rate/latency chain.
    NetworkGeometry geo = default_geo();
    ClientDefaults defs;
    Rng rng(2718);
    auto clients = place_clients(geo, defs, 6, rng);

    RoundInstance inst;
    inst.geo = geo;
    inst.clients = clients;
    inst.num_conventional = 3;
    for (const auto& c : clients) inst.conv_gain.push_back(conventional_gain(geo, c.position()));

    RoundDecision d;
    d.x_p = 13.7;
    d.powers = {0.05, 0.17, 0.11, 0.02, 0.2, 0.08};
    d.freqs = {1.1e9, 0.7e9, 2.0e9, 1.4e9, 0.9e9, 1.8e9};

    auto metrics = evaluate_round(inst, d);

    // --- independent evaluation ---
    double noise = std::pow(10.0, (geo.noise_psd_dbm - 30.0) / 10.0) * geo.bandwidth_hz;
    double eta = geo.pathloss_const();
    auto gain_of = [&](std::size_t i) {
        const auto& c = clients[i];
        if (i < 3) {
            double dist = std::sqrt(c.x * c.x + c.y * c.y);
            return eta * eta * std::pow(dist, -geo.pathloss_exp);
        }
        double dx = c.x - d.x_p;
        double dd = std::sqrt(dx * dx + c.y * c.y + geo.waveguide_height * geo.waveguide_height);
        return (eta / dd) * (eta / dd);
    };
    double worst = 0.0;
    for (std::size_t group = 0; group < 2; ++group) {
        std::vector<std::size_t> idx = group == 0 ? std::vector<std::size_t>{0, 1, 2}
                                                  : std::vector<std::size_t>{3, 4, 5};
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return gain_of(a) > gain_of(b);
        });
        for (std::size_t pos = 0; pos < idx.size(); ++pos) {
            std::size_t i = idx[pos];
            double interf = 0.0;
            for (std::size_t q = pos + 1; q < idx.size(); ++q)
                interf += d.powers[idx[q]] * gain_of(idx[q]);
            double rate = geo.bandwidth_hz *
                          std::log2(1.0 + d.powers[i] * gain_of(i) / (interf + noise));
            double t_cmp = clients[i].cycles * clients[i].samples / d.freqs[i];
            double t_com = clients[i].upload_bits / rate;
            worst = std::max(worst, t_cmp + t_com);
            CHECK(metrics.clients[i].rate == doctest::Approx(rate).epsilon(1e-12));
        }
    }
    CHECK(metrics.round_latency == doctest::Approx(worst).epsilon(1e-12));
}

TEST_CASE("pinching disabled falls back to server-link gains") {
    NetworkGeometry geo = default_geo();
    RoundInstance inst;
    inst.geo = geo;
    for (std::uint32_t i = 0; i < 4; ++i) {
        ClientProfile c = basic_client(i);
        c.x = 3.0 + 5.0 * i;
        c.y = -1.0;
        inst.clients.push_back(c);
    }
    inst.num_conventional = 2;
    inst.conv_gain = {2.0e-7, 9.0e-8, 6.0e-8, 4.0e-8};
    inst.pinching_enabled = false;

    RoundDecision d;
    d.x_p = 11.0;  // must be ignored
    d.powers = {0.1, 0.1, 0.1, 0.1};
    d.freqs = {1.0e9, 1.0e9, 1.0e9, 1.0e9};
    auto a = evaluate_round(inst, d);
    d.x_p = 29.0;
    auto b = evaluate_round(inst, d);
    CHECK(a.round_latency == b.round_latency);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.clients[i].rate == b.clients[i].rate);

    // second group's rates must match a conventional NOMA group on its own band
    double noise = geo.noise_power();
    NomaGroup g = make_sorted_group({{2, 6.0e-8, 0.1}, {3, 4.0e-8, 0.1}}, geo.bandwidth_hz, noise);
    auto rr = sic_rates(g);
    CHECK(a.clients[2].rate == doctest::Approx(rr[0]).epsilon(1e-12));
    CHECK(a.clients[3].rate == doctest::Approx(rr[1]).epsilon(1e-12));
}

TEST_CASE("energy bookkeeping marks violations and excess") {
    NetworkGeometry geo = default_geo();
    RoundInstance inst;
    inst.geo = geo;
    ClientProfile c = basic_client(0);
    c.x = 10.0;
    c.e_max = 1.0e-4;  // tiny budget forces a violation
    inst.clients = {c};
    inst.num_conventional = 1;
    inst.conv_gain = {1.0e-7};

    RoundDecision d;
    d.powers = {0.2};
    d.freqs = {2.0e9};
    auto m = evaluate_round(inst, d);
    CHECK(m.energy_violations == 1);
    CHECK_FALSE(m.clients[0].energy_ok);
    double e_total = m.clients[0].e_cmp + m.clients[0].e_com;
    CHECK(m.energy_excess == doctest::Approx(e_total - 1.0e-4).epsilon(1e-12));
    CHECK_FALSE(m.all_energy_ok());
}
