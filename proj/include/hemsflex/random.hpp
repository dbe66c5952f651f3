#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hemsflex {

using Rng = std::mt19937_64;

/// Independent stream `stream` derived from `seed`. Streams depend only on
/// (seed, domain, stream), so work split across threads stays reproducible.
inline Rng make_stream(std::uint64_t seed, std::uint64_t domain, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

// Domain tags so that different stages never share a stream.
namespace stream_domain {
inline constexpr std::uint64_t copula = 1;
inline constexpr std::uint64_t epso_particle = 2;
inline constexpr std::uint64_t epso_seed = 3;
inline constexpr std::uint64_t infeasible = 4;
inline constexpr std::uint64_t baseline = 5;
inline constexpr std::uint64_t test = 99;
}  // namespace stream_domain

/// Standard normal draw by Box-Muller. Used instead of std::normal_distribution
/// so that draws do not depend on the standard library's cached second value.
inline double standard_normal(Rng& rng)
{
    constexpr double two_pi = 6.283185307179586476925286766559;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u1 = unit(rng);
    while (u1 <= 0.0) u1 = unit(rng);
    const double u2 = unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace hemsflex
