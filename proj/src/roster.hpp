#pragma once

#include <string>
#include <vector>

#include "geometry.hpp"

namespace pinchfl {

// Column order is part of the on-disk contract; the header below is emitted
// and required byte-for-byte (UTF-8).
inline constexpr const char* kRosterHeader =
    "id,x,y,D_n,c_n,f_max,p_max,E_max,d_n,\xcf\x96,\xcf\x84_wb,\xce\xbb_wb";

std::string roster_to_csv(const std::vector<ClientProfile>& clients);
std::vector<ClientProfile> roster_from_csv_text(const std::string& text);

void save_roster(const std::string& path, const std::vector<ClientProfile>& clients);
std::vector<ClientProfile> load_roster(const std::string& path);

} // namespace pinchfl
