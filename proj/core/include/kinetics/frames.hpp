/// @file frames.hpp
/// @brief Coordinate transforms between the expanding-ball (lab) frame and
///        the fixed unit-ball frame, Maxwellian reference states, moments,
///        weights, and the time reparametrization.
///
/// The lab-frame domain is the ball |x| <= R(t) with R(t) = sqrt(1 + h^2
/// t^2). Rescaling y = x / R(t), tau = arctan(h t) / h and eta = R(t) xi -
/// h^2 t x / R(t) freezes the domain to the unit ball and compresses lab
/// time [0, inf) to tau in [0, pi / (2h)). The traveling Maxwellian, an
/// exact solution in the lab frame, factorizes as mu(eta) * mu_tilde(y) in
/// the fixed frame; perturbations are measured against that product.

#pragma once

#include <vector>

#include "kinetics/params.hpp"
#include "kinetics/vec3.hpp"
#include "kinetics/velocity_grid.hpp"

namespace kinetics {

struct LabPoint {
    double t = 0.0;  ///< lab time, >= 0
    Vec3 x;          ///< lab position, |x| <= R(t)
    Vec3 xi;         ///< lab velocity
};

struct FixedPoint {
    double tau = 0.0;  ///< fixed-frame time in [0, pi/(2h))
    Vec3 y;            ///< position in the closed unit ball
    Vec3 eta;          ///< fixed-frame velocity
};

struct MacroState {
    double rho = 0.0;        ///< mass density
    Vec3 v;                  ///< bulk velocity
    double theta = 0.0;      ///< temperature
    bool degenerate = false; ///< set when rho sits below the quadrature floor
};

/// Ball radius R(t) = sqrt(1 + h^2 t^2).
double ball_radius(double t, const SimParams& params);

/// Lab -> fixed frame. Rejects points outside the ball.
FixedPoint to_fixed_frame(const LabPoint& p, const SimParams& params);

/// Fixed -> lab frame; exact algebraic inverse of to_fixed_frame.
/// Rejects tau >= pi / (2h) and |y| > 1.
LabPoint to_lab_frame(const FixedPoint& q, const SimParams& params);

/// Global Maxwellian mu(eta) = (2 pi)^{-3/2} exp(-|eta|^2 / 2) and its
/// square root; the spatial factor mu_tilde(y) = exp(-h^2 |y|^2 / 2).
double maxwellian_mu(const Vec3& eta);
double maxwellian_mu_sqrt(const Vec3& eta);
double mu_tilde(const Vec3& y, const SimParams& params);
double mu_tilde_sqrt(const Vec3& y, const SimParams& params);

/// Traveling Maxwellian in lab coordinates:
/// (2 pi)^{-3/2} exp(-|xi|^2/2 - h^2 |x - t xi|^2 / 2).
double traveling_maxwellian(const LabPoint& p, const SimParams& params);

/// Macroscopic moments of a nonnegative velocity profile on the grid:
/// rho = integral f, rho v = integral xi f, rho theta = integral |xi-v|^2/2 f.
/// Profiles with rho < 1e-14 come back flagged degenerate (all zeros) so
/// diagnostics never divide by a vacuum density.
MacroState moments(const std::vector<double>& f_slice, const VelocityGrid& grid);

/// alpha(tau) = integral_0^tau cos^2(h s) ds = tau/2 + sin(2 h tau)/(4 h).
/// This is the natural clock of the damped fixed-frame dynamics: decay
/// rates are linear in alpha(tau), not in tau.
double alpha(double tau, const SimParams& params);

/// Polynomial velocity weight phi(y, eta) = (1 + |eta|^2 + h^2 |y|^2)^{beta/2}.
/// It is invariant along free transport in the fixed frame, which is what
/// makes weighted sup-norm estimates propagate cleanly.
double weight_phi(const FixedPoint& q, const SimParams& params);

struct DensitySample {
    double t = 0.0;
    Vec3 x;
    double rho = 0.0;
};

struct DensityBounds {
    double c0 = 0.0;  ///< inf of rho(t,x) R(t)^3 over the series
    double C0 = 0.0;  ///< sup of rho(t,x) R(t)^3 over the series
    bool pass = false;
};

/// Checks the sandwich 0 < c0 <= rho R^3 <= C0 < inf on a sampled series.
/// Throws on an empty series or any nonpositive density.
DensityBounds density_bounds_check(const std::vector<DensitySample>& series,
                                   const SimParams& params);

}  // namespace kinetics
