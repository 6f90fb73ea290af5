#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace pinchfl {

// 64-bit FNV-1a over the bytes of a label.
std::uint64_t fnv1a64(std::string_view s);

// SplitMix64 finalizer: bijective 64-bit mix.
std::uint64_t splitmix64_mix(std::uint64_t z);

// Stage seed = mix(master XOR hash(label)).  Distinct labels give
// uncorrelated, reproducible streams from one master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

// Deterministic RNG: mt19937_64 plus hand-rolled distribution transforms so
// sampled values are bit-identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed), spare_valid_(false), spare_(0.0) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0,1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive integer range via rejection (unbiased).
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

    // Standard normal via Box-Muller (spare cached).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
    double gamma(double shape);

    // Unit-mean exponential via inversion.
    double exponential() ;

    // Dirichlet(alpha, ..., alpha) of given dimension.
    std::vector<double> dirichlet(double alpha, std::size_t dim);

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(0, i - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Full generator state (engine + Box-Muller spare) as text; restore()
    // resumes the exact stream.
    std::string state() const;
    void restore(const std::string& text);

private:
    std::mt19937_64 eng_;
    bool spare_valid_;
    double spare_;
};

} // namespace pinchfl
