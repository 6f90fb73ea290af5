#pragma once

#include <complex>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"

namespace pinchfl {

// Default static parameters stamped onto every generated client.
struct ClientDefaults {
    double cycles = 2.0e4;        // cycles per sample
    double f_max = 2.0e9;         // Hz
    double p_max = 0.2;           // W
    double e_max = 1.0;           // J per round
    double upload_bits = 1.0e6;   // bits
    double dc_scale = 1.0;        // plateau of the data-contribution curve
    double dc_coeff = 1.0;        // coefficient of the decaying term
    double dc_rate = 0.0;         // 0 = auto: 3 / max samples in population
    double samples_min = 200.0;   // uniform integer draw bounds for D_n
    double samples_max = 2000.0;
};

// Complex coefficient of the radiating-element link for a client at `pos`
// when the element sits at waveguide position x_p:
//   h = (eta / dist) * exp(-i * 2 pi dist / lambda).
std::complex<double> pinching_coefficient(const NetworkGeometry& geo, const Point3& pos,
                                          double x_p);

// |h|^2 of the above: eta^2 / dist^2.
double pinching_gain(const NetworkGeometry& geo, const Point3& pos, double x_p);

// Conventional (fixed-antenna) power gain from the server at the origin:
//   |h_s|^2 = eta^2 * dist^(-pathloss_exp) * fading,
// where fading is a unit-mean exponential draw when enabled and 1 otherwise.
double conventional_gain(const NetworkGeometry& geo, const Point3& pos, double fading = 1.0);

// Draw `count` clients uniformly over the service area with D_n uniform
// integers in [samples_min, samples_max]; dc_rate auto-resolves to
// 3 / max(D_n) when left at 0.
std::vector<ClientProfile> place_clients(const NetworkGeometry& geo, const ClientDefaults& defs,
                                         std::size_t count, Rng& rng);

} // namespace pinchfl
