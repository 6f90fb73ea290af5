#include "rng.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace pinchfl {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    return splitmix64_mix(master ^ fnv1a64(label));
}

double Rng::uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t span = hi - lo + 1;   // hi >= lo; span == 0 means full range
    if (span == 0) return eng_();
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do { x = eng_(); } while (x >= limit);
    return lo + x % span;
}

double Rng::normal() {
    if (spare_valid_) {
        spare_valid_ = false;
        return spare_;
    }
    double u1, u2;
    do { u1 = uniform(); } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    spare_valid_ = true;
    return r * std::cos(theta);
}

double Rng::gamma(double shape) {
    if (shape < 1.0) {
        // Boost to shape+1 and scale back (Marsaglia-Tsang trick).
        double u;
        do { u = uniform(); } while (u <= 0.0);
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::exponential() {
    double u;
    do { u = uniform(); } while (u <= 0.0);
    return -std::log(u);
}

std::string Rng::state() const {
    std::ostringstream os;
    os << eng_ << ' ' << (spare_valid_ ? 1 : 0) << ' ';
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), spare_);
    os.write(buf, res.ptr - buf);
    return os.str();
}

void Rng::restore(const std::string& text) {
    std::istringstream is(text);
    is >> eng_;
    int flag = 0;
    is >> flag;
    spare_valid_ = (flag != 0);
    std::string tail;
    is >> tail;
    double v = 0.0;
    std::from_chars(tail.data(), tail.data() + tail.size(), v);
    spare_ = v;
}

std::vector<double> Rng::dirichlet(double alpha, std::size_t dim) {
    std::vector<double> g(dim);
    double total = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        g[i] = gamma(alpha);
        total += g[i];
    }
    if (total <= 0.0) {
        // Degenerate draw (all zeros possible only in underflow); fall back to uniform.
        for (auto& x : g) x = 1.0 / static_cast<double>(dim);
        return g;
    }
    for (auto& x : g) x /= total;
    return g;
}

} // namespace pinchfl
