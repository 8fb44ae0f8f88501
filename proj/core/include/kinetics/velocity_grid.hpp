/// @file velocity_grid.hpp
/// @brief Uniform Cartesian velocity lattice with trapezoid quadrature.
///
/// A single quadrature convention is shared by the collision operator, the
/// macro-micro projections and the solver: nodes on [-eta_max, eta_max]^3
/// with product trapezoid weights. Gaussian-weighted integrands decay so
/// fast that the trapezoid rule converges spectrally in the spacing once the
/// truncation radius dominates the error.

#pragma once

#include <cstddef>
#include <vector>

#include "kinetics/vec3.hpp"

namespace kinetics {

struct VelocityGrid {
    int n = 0;               ///< nodes per axis (>= 2)
    double eta_max = 0.0;    ///< half-width of the cube
    double spacing = 0.0;    ///< lattice spacing
    std::vector<double> axis;     ///< axis coordinates, size n
    std::vector<double> waxis;    ///< 1-D trapezoid weights, size n
    std::vector<Vec3> nodes;      ///< n^3 lattice nodes, z index fastest
    std::vector<double> weights;  ///< matching product weights

    static VelocityGrid make(int n, double eta_max);

    std::size_t size() const { return nodes.size(); }

    std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(ix) * n + iy) * n + iz;
    }

    /// Trapezoid approximation of the integral of f over the cube.
    double integrate(const std::vector<double>& f) const;

    /// Quadrature inner product of two lattice fields.
    double inner(const std::vector<double>& f, const std::vector<double>& g) const;

    /// Quadrature L2 norm.
    double norm(const std::vector<double>& f) const;

    /// Multilinear interpolation of a lattice field at an arbitrary velocity.
    /// Coordinates are clamped to the cube: fields of interest carry
    /// Maxwellian tails, so values at the hull are already negligible.
    double trilinear(const std::vector<double>& f, const Vec3& eta) const;
};

}  // namespace kinetics
