#include "geometry.hpp"

#include "errors.hpp"

namespace pinchfl {

void NetworkGeometry::validate() const {
    if (!(length > 0.0)) throw ConfigError("geometry.length must be positive");
    if (!(width > 0.0)) throw ConfigError("geometry.width must be positive");
    if (!(waveguide_height > 0.0)) throw ConfigError("geometry.waveguide_height must be positive");
    if (!(carrier_hz > 0.0)) throw ConfigError("geometry.carrier_hz must be positive");
    if (!(bandwidth_hz > 0.0)) throw ConfigError("geometry.bandwidth_hz must be positive");
    if (!(pathloss_exp > 0.0)) throw ConfigError("geometry.pathloss_exp must be positive");
}

} // namespace pinchfl
