/// @file spatial_grid.hpp
/// @brief Cartesian sampling of the open unit ball with cut-cell volumes.
///
/// Nodes live on an axis-aligned lattice spanning the bounding cube of the
/// ball, with an odd number of points per axis so the origin is a node and
/// the node set is invariant under coordinate reflections and permutations.
/// Cell volumes are clipped to the ball, so lattice sums are midpoint
/// quadratures over the ball and integrals of odd functions vanish exactly.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "kinetics/vec3.hpp"

namespace kinetics {

struct SpatialGrid {
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    std::size_t n = 0;     ///< lattice points per axis of the bounding cube
    double spacing = 0.0;  ///< lattice step, 2 / (n - 1)

    std::vector<double> axis;    ///< axis coordinates, symmetric about zero
    std::vector<Vec3> nodes;     ///< nodes strictly inside the unit ball
    std::vector<double> volume;  ///< cell volume clipped to the ball, per node
    std::vector<char> hull;      ///< 1 when a lattice neighbour leaves the ball
    std::vector<std::array<std::int32_t, 3>> ijk;  ///< lattice coordinates
    std::vector<std::size_t> lookup;  ///< lattice index -> node id or npos

    /// Builds the grid for an odd per-axis count; throws std::invalid_argument
    /// for even or degenerate counts. Cut cells are measured by midpoint
    /// subsampling with a reflection-symmetric sample set, which keeps mirror
    /// volumes bitwise equal.
    static SpatialGrid make(std::size_t n = 33);

    std::size_t size() const { return nodes.size(); }

    std::size_t lattice_index(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return (ix * n + iy) * n + iz;
    }

    /// Node id at lattice coordinates; npos when outside the ball or the box.
    std::size_t node_at(std::int64_t ix, std::int64_t iy, std::int64_t iz) const;

    /// Midpoint cut-cell quadrature of a node field over the ball.
    double integrate(const std::vector<double>& f) const;

    /// Volume-weighted inner product of two node fields.
    double inner(const std::vector<double>& f, const std::vector<double>& g) const;

    /// Discrete H1 norm: volume-weighted value part plus forward-difference
    /// gradient part over the node pairs available inside the ball.
    double h1_norm(const std::vector<double>& f) const;
};

/// Writes one "x y z value" line per node.
void dump_field(std::ostream& os, const SpatialGrid& grid,
                const std::vector<double>& field);

}  // namespace kinetics
