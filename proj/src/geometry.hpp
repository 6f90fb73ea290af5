#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace pinchfl {

inline constexpr double kSpeedOfLight = 3.0e8;   // m/s
inline constexpr double kPi = 3.14159265358979323846;

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline double distance(const Point3& a, const Point3& b) {
    double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Rectangular service area: x in [0, length], y in [-width/2, width/2],
// clients on the ground plane z = 0.  The waveguide runs along the x-axis
// at y = 0, height `waveguide_height`; the server sits at the origin.
struct NetworkGeometry {
    double length = 30.0;            // m
    double width = 10.0;             // m
    double waveguide_height = 3.0;   // m
    double carrier_hz = 3.5e9;
    double bandwidth_hz = 1.0e6;     // per NOMA group
    double noise_psd_dbm = -174.0;   // dBm/Hz
    double pathloss_exp = 2.4;       // conventional-link exponent

    double wavelength() const { return kSpeedOfLight / carrier_hz; }

    // Free-space reference amplitude: c / (4 pi f_c).
    double pathloss_const() const { return kSpeedOfLight / (4.0 * kPi * carrier_hz); }

    // Noise power over one group's band, in watts.
    double noise_power() const {
        return std::pow(10.0, (noise_psd_dbm - 30.0) / 10.0) * bandwidth_hz;
    }

    Point3 server() const { return Point3{0.0, 0.0, 0.0}; }

    void validate() const;
};

// Static per-client parameters fixed at roster generation.
struct ClientProfile {
    std::uint32_t id = 0;
    double x = 0.0;
    double y = 0.0;
    double samples = 0.0;       // D_n, local dataset size
    double cycles = 0.0;        // c_n, CPU cycles per sample
    double f_max = 0.0;         // Hz
    double p_max = 0.0;         // W
    double e_max = 0.0;         // J, per-round energy budget
    double upload_bits = 0.0;   // d_n
    double dc_scale = 0.0;      // data-contribution plateau
    double dc_coeff = 0.0;      // data-contribution coefficient
    double dc_rate = 0.0;       // data-contribution decay rate

    Point3 position() const { return Point3{x, y, 0.0}; }
};

} // namespace pinchfl
