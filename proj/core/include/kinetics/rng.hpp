/// @file rng.hpp
/// @brief Deterministic quasi-random streams for Monte Carlo quadratures.
///
/// Collision-operator cross checks integrate over (eta*, omega) in R^3 x S^2
/// with a Gaussian density in eta*. Every sample is a pure function of
/// (seed, stream, index), so estimates are bit-reproducible regardless of
/// evaluation order or thread count.

#pragma once

#include <cstdint>

#include "kinetics/vec3.hpp"

namespace kinetics {

/// Radical-inverse (van der Corput) digit reversal of i in the given base.
double radical_inverse(std::uint64_t i, std::uint32_t base);

/// Standard normal quantile function (Acklam's rational approximation,
/// relative error below 1.2e-9; ample for sampling purposes).
double normal_quantile(double p);

/// splitmix64 hash; used to derive stream offsets from seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// A 5-dimensional Halton sequence with a seed-derived starting offset.
/// Dimension d uses the d-th prime base (2, 3, 5, 7, 11). Distinct streams
/// of the same seed are far apart in the sequence, so they can be consumed
/// independently.
class HaltonStream {
  public:
    HaltonStream(std::uint64_t seed, std::uint64_t stream);

    /// Coordinate d in [0, 5) of sequence element `index`, in (0, 1).
    double dim(std::uint64_t index, int d) const;

    /// Standard normal 3-vector from dimensions 0..2 of element `index`.
    Vec3 gaussian3(std::uint64_t index) const;

    /// Uniform point on the unit sphere from dimensions 3..4.
    Vec3 sphere(std::uint64_t index) const;

  private:
    std::uint64_t offset_;
};

}  // namespace kinetics
