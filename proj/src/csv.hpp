#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pinchfl {

// Shortest round-trip decimal form of a double (std::to_chars), locale-free.
// Infinities render as "inf"/"-inf", NaN as "nan".
std::string format_double(double v);

std::string format_u64(std::uint64_t v);

// Parse helpers that reject trailing garbage.
double parse_double(const std::string& s);
std::uint64_t parse_u64(const std::string& s);

// Minimal CSV writer: caller supplies fully formatted cells; commas and
// newlines are the only structure (no quoting — no field ever contains them).
class CsvWriter {
public:
    void header(const std::vector<std::string>& cols);
    void row(const std::vector<std::string>& cells);
    const std::string& str() const { return buf_; }
    void write_file(const std::string& path) const;

private:
    std::string buf_;
    std::size_t cols_ = 0;
};

// Split one CSV line on commas (no quoting).
std::vector<std::string> csv_split(const std::string& line);

// Read a whole file into lines, tolerating a trailing newline.
std::vector<std::string> read_lines(const std::string& path);

void write_file(const std::string& path, const std::string& content);

} // namespace pinchfl
