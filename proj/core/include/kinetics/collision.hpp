/// @file collision.hpp
/// @brief Linearized hard-sphere collision operator on the velocity lattice:
///        collision frequency, integral kernel, dense and matrix-free
///        applications of L, hydrodynamic projection, Burnett functions, and
///        Monte Carlo cross checks of the bilinear form.
///
/// The linearized operator splits as L u = -nu(eta) u + K u, where nu is the
/// multiplication part and K is an integral operator whose kernel k(eta,
/// eta*) has an integrable 1/|eta - eta*| singularity at coincidence. On the
/// lattice the singular cell is handled by subtracting a local collision
/// invariant that interpolates u to first order: the subtracted field lies
/// in the kernel of L, so the quadrature never evaluates k at the
/// singularity and the five discrete invariants are annihilated exactly.
/// Independent Monte Carlo quadratures of the symmetrized bilinear form
/// Q(f, g) tie the lattice operator back to its defining integral.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "kinetics/frames.hpp"
#include "kinetics/params.hpp"
#include "kinetics/vec3.hpp"
#include "kinetics/velocity_grid.hpp"

namespace kinetics {

/// Collision frequency of the global Maxwellian for hard spheres,
///   nu(eta) = sqrt(2 pi) [ (r + 1/r) int_0^r exp(-s^2/2) ds + exp(-r^2/2) ],
/// with r = |eta|. Monotone increasing, nu(0) = 2 sqrt(2 pi), and
/// nu(r) / r -> pi as r -> infinity.
double nu(const Vec3& eta);
double nu_radial(double r);

/// Caches the frequency bounds nu0 <= nu(eta) <= nu1 (1 + |eta|) realized on
/// a lattice: nu0 is the lattice infimum and nu1 the least envelope slope,
/// both attained at some node.
struct NuProfile {
    double nu0 = 0.0;
    double nu1 = 0.0;

    static NuProfile fit(const VelocityGrid& grid);
};

/// Symmetric kernel of the integral part K of the linearized operator,
///   k(eta, eta*) = c2 |d|^{-1} exp(-(|eta*|^2 - |eta|^2)^2 / (8 |d|^2)
///                              - |d|^2 / 8)
///                - c1 |d|   exp(-(|eta|^2 + |eta*|^2) / 4),
/// with d = eta - eta*, c2 = sqrt(2/pi) and c1 = pi (2 pi)^{-3/2}. The gain
/// term carries the integrable 1/|d| singularity; exact coincidence throws
/// std::domain_error.
double kernel_k(const Vec3& eta, const Vec3& eta_star);

/// The five collision invariants and the Burnett functions, normalized so
/// the continuum Gram matrix is the identity on the chi block and
/// <B_ij, B_kl> = d_ik d_jl + d_il d_jk - (2/3) d_ij d_kl on the B block:
///   chi_0 = mu^{1/2},  chi_j = eta_j mu^{1/2},
///   chi_4 = (|eta|^2 - 3) mu^{1/2} / sqrt(6),
///   A_j   = eta_j (|eta|^2 - 5) mu^{1/2} / sqrt(10),
///   B_kl  = (eta_k eta_l - d_kl |eta|^2 / 3) mu^{1/2}.
struct InvariantBasis {
    static double chi(int k, const Vec3& eta);
    static double burnett_a(int j, const Vec3& eta);
    static double burnett_b(int k, int l, const Vec3& eta);

    static std::vector<double> chi_slice(int k, const VelocityGrid& grid);
    static std::vector<double> burnett_a_slice(int j, const VelocityGrid& grid);
    static std::vector<double> burnett_b_slice(int k, int l, const VelocityGrid& grid);
};

/// Dense lattice discretization of the integral operator K. Off-diagonal
/// entries are k(eta_i, eta_j) w_j; the diagonal is moment matched so that
/// K mu^{1/2} = nu mu^{1/2} holds exactly on the lattice, which pins the
/// singular-cell mass to the one integral known in closed form. The
/// weighted variant conjugates by the polynomial weight phi(y, eta) and
/// reduces to the plain matrix when the weight exponent vanishes.
///
/// Row moments of the five monomials {1, eta, |eta|^2} against mu^{1/2} are
/// cached at build time so the invariant-subtraction scheme in apply_L costs
/// one matrix-vector product. Instances are immutable after construction.
class KernelMatrix {
  public:
    std::size_t size() const { return n_; }
    const VelocityGrid& grid() const { return grid_; }
    bool weighted() const { return !phi_.empty(); }

    /// Effective matrix entry, weight conjugation included.
    double entry(std::size_t i, std::size_t j) const;

    /// nu(eta_i), cached.
    double nu_at(std::size_t i) const { return nu_[i]; }

    /// Dense product (K u)_i, weight conjugation included.
    std::vector<double> multiply(const std::vector<double>& u) const;

    /// Plain-text dump: a header line, the size, then one whitespace
    /// separated row of effective entries per line.
    void dump(std::ostream& os) const;

  private:
    friend KernelMatrix build_kernel_matrix(const VelocityGrid&, bool);
    friend KernelMatrix build_kernel_matrix(const VelocityGrid&, const Vec3&,
                                            const SimParams&, bool);
    friend std::vector<double> apply_L(const std::vector<double>&, const KernelMatrix&);

    KernelMatrix() = default;

    std::size_t n_ = 0;
    VelocityGrid grid_;
    std::vector<double> raw_;      ///< unweighted entries, row major
    std::vector<double> nu_;       ///< collision frequency at the nodes
    std::vector<double> mu_sqrt_;  ///< mu^{1/2} at the nodes
    std::vector<double> phi_;      ///< weight at the nodes; empty when plain
    /// Row sums of k(eta_i, eta_j) w_j p(eta_j) mu_j^{1/2} over j != i for
    /// the monomials p in {1, eta_1, eta_2, eta_3, |eta|^2}.
    std::array<std::vector<double>, 5> row_moment_;
};

/// Assembles the dense kernel matrix. Lattices beyond 41 nodes per axis are
/// rejected outright (std::length_error); matrices above 256 MiB require
/// allow_large (std::invalid_argument otherwise). Use apply_L_direct for
/// audits on lattices where the dense matrix is not worth storing.
KernelMatrix build_kernel_matrix(const VelocityGrid& grid, bool allow_large = false);

/// Weighted variant: entries carry phi(y, eta_i) / phi(y, eta_j) with
/// phi = (1 + |eta|^2 + h^2 |y|^2)^{beta/2} from params.
KernelMatrix build_kernel_matrix(const VelocityGrid& grid, const Vec3& y,
                                 const SimParams& params, bool allow_large = false);

/// Applies the linearized operator L u = -nu u + K u through the dense
/// matrix. Interior rows subtract the first-order local invariant
///   G_j = [v_i + b.(eta_j - eta_i) + g (|eta_j|^2 - |eta_i|^2)] mu_j^{1/2},
/// with v = u / mu^{1/2}, g = lap(v)/6 and b = grad(v) - 2 g eta_i from
/// central differences, so the integrand vanishes at the singular cell;
/// hull rows fall back to the zeroth-order subtraction implied by the
/// moment-matched diagonal. The result is then projected onto the
/// orthogonal complement of the discrete invariants, which enforces the
/// conservation laws <L u, chi_k> = 0 to rounding. Weighted matrices apply
/// the conjugated operator phi L(u / phi).
std::vector<double> apply_L(const std::vector<double>& u, const KernelMatrix& kernel);

/// Matrix-free evaluation of the same scheme as apply_L on the plain
/// (unweighted) operator: O(n^2) kernel evaluations, O(n) memory. Exact
/// agreement with the dense route; intended for refinement audits on
/// lattices whose dense matrix would not fit.
std::vector<double> apply_L_direct(const std::vector<double>& u, const VelocityGrid& grid);

/// Quadrature projection onto the discrete span of the five collision
/// invariants. Coefficients solve the 5x5 lattice Gram system, so P chi_k =
/// chi_k and P o P = P hold to rounding regardless of the lattice.
std::vector<double> project_P(const std::vector<double>& u, const VelocityGrid& grid);

/// Lattice Gram table of the Burnett functions against the closed forms
/// <A_j, A_i> = d_ji, <A_j, B_kl> = 0, and
/// <B_ij, B_kl> = d_ik d_jl + d_il d_jk - (2/3) d_ij d_kl.
struct BurnettGram {
    std::array<std::array<double, 3>, 3> aa{};
    std::array<std::array<std::array<double, 3>, 3>, 3> ab{};
    std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3> bb{};
    double max_deviation = 0.0;  ///< sup distance to the closed forms

    static double aa_exact(int j, int i);
    static double ab_exact(int j, int k, int l);
    static double bb_exact(int i, int j, int k, int l);

    /// Plain-text dump: labeled AA / AB / BB blocks, one entry per line.
    void dump(std::ostream& os) const;
};

BurnettGram burnette_gram(const VelocityGrid& grid);

/// A velocity profile given in closed form, evaluable at arbitrary eta.
using VelocityProfile = std::function<double(const Vec3&)>;

/// A Monte Carlo estimate with its standard error.
struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo quadrature of the symmetrized hard-sphere bilinear form
///   Q(f, g)(eta) = (1/2) int |(eta - eta*).w|
///                  (f' g*' + f*' g' - f g* - f* g) deta* dw,
/// importance sampling eta* from the Maxwellian and w uniformly on the
/// sphere through a deterministic low-discrepancy stream: a given (seed,
/// n_samples) pair reproduces bit-identical estimates.
McEstimate q_bilinear_mc(const VelocityProfile& f, const VelocityProfile& g,
                         const Vec3& eta, std::size_t n_samples, std::uint64_t seed);

/// Bilinear perturbation operator Gamma(g, h) = mu^{-1/2} Q(mu^{1/2} g,
/// mu^{1/2} h), estimated through q_bilinear_mc on the same sample path.
McEstimate gamma_mc(const VelocityProfile& g, const VelocityProfile& h,
                    const Vec3& eta, std::size_t n_samples, std::uint64_t seed);

/// Weighted bilinear operator Gamma_phi(w_g, w_h) = phi Gamma(w_g / phi,
/// w_h / phi) evaluated at the phase point q; the weight is frozen at q.y.
/// With a vanishing weight exponent this is gamma_mc on the identical
/// sample path. params is taken as given, so exponents outside the
/// validated range are usable for reductions.
McEstimate gamma_phi(const VelocityProfile& w_g, const VelocityProfile& w_h,
                     const FixedPoint& q, const SimParams& params,
                     std::size_t n_samples, std::uint64_t seed);

}  // namespace kinetics
