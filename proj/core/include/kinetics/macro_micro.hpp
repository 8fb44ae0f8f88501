/// @file macro_micro.hpp
/// @brief Macroscopic/microscopic splitting of phase-space fields, conserved
///        moments, elliptic potential solves on the ball, and the weighted
///        test functions built from them.
///
/// Phase-space fields pair a spatial node with a full velocity slice and are
/// stored spatial-major: value(s, v) = field[s * vgrid.size() + v].
///
/// The splitting writes u = {a chi_0 + sum_j b_j chi_j + (c - q) chi_4}
/// w^{-1/2} + d w^{-1/2} per spatial node, where w = exp(-h^2 |y|^2 / 2) is
/// the spatial Maxwellian weight, q = h^2 |y|^2 a / sqrt(6), and d collects
/// the part orthogonal to the five collision invariants. The coefficients
/// are Gram corrected on the velocity lattice so that the reconstruction is
/// exact to rounding.

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "kinetics/params.hpp"
#include "kinetics/spatial_grid.hpp"
#include "kinetics/vec3.hpp"
#include "kinetics/velocity_grid.hpp"

namespace kinetics {

/// Macroscopic coefficient fields on the spatial grid plus the microscopic
/// remainder on the full phase grid.
struct MacroFields {
    std::vector<double> a;  ///< mass coefficient
    std::vector<Vec3> b;    ///< momentum coefficients
    std::vector<double> c;  ///< energy coefficient, c = <u, chi_4> weight + q
    std::vector<double> q;  ///< h^2 |y|^2 a / sqrt(6), pointwise
    std::vector<double> d;  ///< microscopic remainder, spatial-major phase layout
};

/// Mass, weighted energy, and angular momentum functionals that the flow
/// conserves.
struct ConservedMoments {
    double mass = 0.0;
    double energy = 0.0;
    Vec3 angular{0.0, 0.0, 0.0};
};

/// Result of a scalar elliptic solve: node values of the potential, the
/// relative residual of the discrete system actually solved, and the
/// discrete H1 norm of the potential.
struct EllipticSolution {
    std::vector<double> field;
    double residual = 0.0;
    double h1_norm = 0.0;
};

/// Result of the vector elliptic solve with tangential boundary conditions.
struct VectorEllipticSolution {
    std::vector<Vec3> field;
    double residual = 0.0;
    double h1_norm = 0.0;
};

MacroFields decompose(const std::vector<double>& u, const SpatialGrid& sgrid,
                      const VelocityGrid& vgrid, const SimParams& params);

std::vector<double> reconstruct(const MacroFields& mf, const SpatialGrid& sgrid,
                                const VelocityGrid& vgrid, const SimParams& params);

ConservedMoments conservation_functionals(const std::vector<double>& u,
                                          const SpatialGrid& sgrid,
                                          const VelocityGrid& vgrid,
                                          const SimParams& params);

/// Solves -lap(phi) = source on the ball with a homogeneous Neumann
/// condition. Interior nodes carry a fourth-order compact 19-point stencil
/// with the matching source correction; stencil legs that would leave the
/// ball are closed by cubic weighted least-squares fits of nearby ball
/// nodes, constrained so the fitted normal derivative vanishes at the
/// sphere, and evaluated at the outside position directly. The constant
/// null mode is deflated by a rank-one augmentation, the source is
/// projected onto the range of the discrete operator through its computed
/// left null vector, and the potential is returned with zero
/// volume-weighted mean.
///
/// Sources whose relative mean exceeds the compatibility tolerance are
/// rejected with std::invalid_argument.
EllipticSolution solve_poisson_neumann(const std::vector<double>& source,
                                       const SpatialGrid& grid);

/// Solves -lap(phi) = source componentwise on the ball with phi . n = 0 and
/// a vanishing tangential part of the normal derivative on the sphere. The
/// same compact stencil and constrained-fit closure apply, with the three
/// components fitted jointly under the coupled boundary rows. The discrete
/// system is injective, so no deflation or compatibility condition applies.
VectorEllipticSolution solve_vector_poisson_tangential(const std::vector<Vec3>& source,
                                                       const SpatialGrid& grid);

/// Which weighted test function a potential generates.
enum class TestFunctionKind { a, b, c };

/// Phase-space evaluator psi(y, eta) assembled from a grid potential.
///
/// Gradients of the potential at interior points come from the same
/// quadratic least-squares fits used by the elliptic solves. At points on
/// the sphere the evaluator additionally enforces the boundary conditions
/// the potential satisfies: scalar kinds zero the normal derivative, and
/// kind b removes the tangential-normal and normal-tangential parts of the
/// Jacobian, which is exactly what makes the boundary pairings below vanish.
class TestFunctionField {
  public:
    double operator()(const Vec3& y, const Vec3& eta) const;

    /// Fixes the spatial point once and returns a fast velocity evaluator;
    /// the least-squares gradient work happens once per point instead of
    /// once per (point, velocity) pair.
    std::function<double(const Vec3& eta)> at(const Vec3& y) const;

    TestFunctionKind kind() const { return kind_; }
    const SpatialGrid& grid() const { return grid_; }

  private:
    friend TestFunctionField test_function(TestFunctionKind, const std::vector<double>&,
                                           const SpatialGrid&, const SimParams&);
    friend TestFunctionField test_function(TestFunctionKind, const std::vector<Vec3>&,
                                           const SpatialGrid&, const SimParams&);

    TestFunctionField() = default;

    TestFunctionKind kind_ = TestFunctionKind::a;
    SpatialGrid grid_;
    SimParams params_;
    std::vector<double> scalar_;  ///< potential for kinds a and c
    std::vector<Vec3> vector_;    ///< potential for kind b
};

/// Builds psi_a or psi_c from a scalar potential; kind b is rejected.
TestFunctionField test_function(TestFunctionKind kind, const std::vector<double>& potential,
                                const SpatialGrid& grid, const SimParams& params);

/// Builds psi_b from a vector potential; scalar kinds are rejected.
TestFunctionField test_function(TestFunctionKind kind, const std::vector<Vec3>& potential,
                                const SpatialGrid& grid, const SimParams& params);

using PhaseFunction = std::function<double(const Vec3& y, const Vec3& eta)>;

/// Outflow pairing of a test function with a phase-space function over the
/// boundary of phase space: the integral of psi * u * (eta . n) over the
/// sphere cross velocity space. The sphere uses a product rule, composite
/// Simpson in the polar angle and trapezoid in the azimuth, with
/// polar_points panels; velocities use the lattice quadrature. Vanishes to
/// quadrature tolerance when u is specular symmetric and the potential
/// satisfies its boundary conditions.
double boundary_term(const TestFunctionField& psi, const PhaseFunction& u,
                     const VelocityGrid& vgrid, std::size_t polar_points = 48);

}  // namespace kinetics
