#include "channel.hpp"

#include <algorithm>

#include "errors.hpp"

namespace pinchfl {

std::complex<double> pinching_coefficient(const NetworkGeometry& geo, const Point3& pos,
                                          double x_p) {
    Point3 elem{x_p, 0.0, geo.waveguide_height};
    double dist = distance(pos, elem);
    if (dist <= 0.0) throw ConfigError("client co-located with the radiating element");
    double eta = geo.pathloss_const();
    double phase = -2.0 * kPi * dist / geo.wavelength();
    return std::polar(eta / dist, phase);
}

double pinching_gain(const NetworkGeometry& geo, const Point3& pos, double x_p) {
    Point3 elem{x_p, 0.0, geo.waveguide_height};
    double d2 = [&] {
        double dx = pos.x - elem.x, dy = pos.y - elem.y, dz = pos.z - elem.z;
        return dx * dx + dy * dy + dz * dz;
    }();
    if (d2 <= 0.0) throw ConfigError("client co-located with the radiating element");
    double eta = geo.pathloss_const();
    return eta * eta / d2;
}

double conventional_gain(const NetworkGeometry& geo, const Point3& pos, double fading) {
    double dist = distance(pos, geo.server());
    if (dist <= 0.0) throw ConfigError("client co-located with the server: distance is zero");
    double eta = geo.pathloss_const();
    return eta * eta * std::pow(dist, -geo.pathloss_exp) * fading;
}

std::vector<ClientProfile> place_clients(const NetworkGeometry& geo, const ClientDefaults& defs,
                                         std::size_t count, Rng& rng) {
    if (defs.samples_min < 1.0 || defs.samples_max < defs.samples_min)
        throw ConfigError("population.samples range invalid");
    std::vector<ClientProfile> out(count);
    double max_samples = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        ClientProfile& c = out[i];
        c.id = static_cast<std::uint32_t>(i);
        c.x = rng.uniform(0.0, geo.length);
        c.y = rng.uniform(-geo.width / 2.0, geo.width / 2.0);
        c.samples = static_cast<double>(rng.uniform_int(
            static_cast<std::uint64_t>(defs.samples_min),
            static_cast<std::uint64_t>(defs.samples_max)));
        c.cycles = defs.cycles;
        c.f_max = defs.f_max;
        c.p_max = defs.p_max;
        c.e_max = defs.e_max;
        c.upload_bits = defs.upload_bits;
        c.dc_scale = defs.dc_scale;
        c.dc_coeff = defs.dc_coeff;
        c.dc_rate = defs.dc_rate;
        max_samples = std::max(max_samples, c.samples);
    }
    if (defs.dc_rate == 0.0 && max_samples > 0.0) {
        double rate = 3.0 / max_samples;
        for (auto& c : out) c.dc_rate = rate;
    }
    return out;
}

} // namespace pinchfl
