#include "roster.hpp"

#include "csv.hpp"
#include "errors.hpp"

namespace pinchfl {

std::string roster_to_csv(const std::vector<ClientProfile>& clients) {
    std::string out(kRosterHeader);
    out += '\n';
    for (const auto& c : clients) {
        out += format_u64(c.id);
        out += ',';
        out += format_double(c.x);
        out += ',';
        out += format_double(c.y);
        out += ',';
        out += format_double(c.samples);
        out += ',';
        out += format_double(c.cycles);
        out += ',';
        out += format_double(c.f_max);
        out += ',';
        out += format_double(c.p_max);
        out += ',';
        out += format_double(c.e_max);
        out += ',';
        out += format_double(c.upload_bits);
        out += ',';
        out += format_double(c.dc_scale);
        out += ',';
        out += format_double(c.dc_coeff);
        out += ',';
        out += format_double(c.dc_rate);
        out += '\n';
    }
    return out;
}

std::vector<ClientProfile> roster_from_csv_text(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t pos = text.find('\n', start);
        std::string line = (pos == std::string::npos) ? text.substr(start)
                                                      : text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (lines.empty()) throw ConfigError("roster file is empty");
    if (lines[0] != kRosterHeader)
        throw ConfigError("roster header mismatch; expected '" + std::string(kRosterHeader) + "'");
    std::vector<ClientProfile> out;
    out.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto cells = csv_split(lines[i]);
        if (cells.size() != 12)
            throw ConfigError("roster row " + format_u64(i) + " has " + format_u64(cells.size()) +
                              " fields, expected 12");
        ClientProfile c;
        c.id = static_cast<std::uint32_t>(parse_u64(cells[0]));
        c.x = parse_double(cells[1]);
        c.y = parse_double(cells[2]);
        c.samples = parse_double(cells[3]);
        c.cycles = parse_double(cells[4]);
        c.f_max = parse_double(cells[5]);
        c.p_max = parse_double(cells[6]);
        c.e_max = parse_double(cells[7]);
        c.upload_bits = parse_double(cells[8]);
        c.dc_scale = parse_double(cells[9]);
        c.dc_coeff = parse_double(cells[10]);
        c.dc_rate = parse_double(cells[11]);
        out.push_back(c);
    }
    return out;
}

void save_roster(const std::string& path, const std::vector<ClientProfile>& clients) {
    write_file(path, roster_to_csv(clients));
}

std::vector<ClientProfile> load_roster(const std::string& path) {
    auto lines = read_lines(path);
    std::string text;
    for (const auto& l : lines) {
        text += l;
        text += '\n';
    }
    return roster_from_csv_text(text);
}

} // namespace pinchfl
