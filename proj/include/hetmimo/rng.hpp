#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace hetmimo {

using Rng = std::mt19937_64;

/// Independent streams inside one epoch. Each is keyed separately so that
/// e.g. changing the number of fading draws leaves the layout untouched.
enum class StreamTag : std::uint32_t {
    Layout = 1,
    LargeScale = 2,
    Fading = 3,
    Oracle = 4,
};

/// Keyed substream: a pure function of (master seed, epoch, tag), so epochs can
/// run on any worker in any order and still draw identical numbers.
inline Rng substream(std::uint64_t seed, std::uint64_t epoch, StreamTag tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32),
                      static_cast<std::uint32_t>(tag)};
    return Rng(seq);
}

/// Circularly symmetric complex normal with unit variance.
inline std::complex<double> draw_cn(Rng& rng) {
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

/// Vector of i.i.d. CN(0, 1) entries.
inline Eigen::VectorXcd draw_cn_vector(Eigen::Index n, Rng& rng) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = draw_cn(rng);
    return v;
}

inline double draw_uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double draw_normal(Rng& rng, double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(rng);
}

}  // namespace hetmimo
