/// @file params.hpp
/// @brief Global physical and numerical parameters shared by every module.

#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace kinetics {

/// Parameters of the expanding-ball problem. The domain is the unit ball in
/// rescaled coordinates; the lab-frame ball radius is R(t) = sqrt(1 + h^2
/// t^2), so h controls the expansion speed. beta is the exponent of the
/// polynomial phase-space weight and must exceed 3/2 for the weighted
/// collision estimates to hold. eta_max truncates the velocity lattice, and
/// seed feeds every quasi-random quadrature so runs are reproducible.
struct SimParams {
    double h = 0.5;
    double beta = 2.5;
    double eta_max = 6.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(h > 0.0)) throw std::invalid_argument("SimParams: h must be positive");
        if (!(beta > 1.5)) throw std::invalid_argument("SimParams: beta must exceed 3/2");
        if (!(eta_max > 0.0)) throw std::invalid_argument("SimParams: eta_max must be positive");
    }

    /// Length of the rescaled time interval: lab time t in [0, inf) maps to
    /// tau = arctan(h t) / h in [0, pi / (2 h)).
    double tau_horizon() const { return std::numbers::pi / (2.0 * h); }
};

}  // namespace kinetics
