/// @file collision.cpp
/// @brief Hard-sphere collision frequency, kernel, lattice operator, and the
///        Monte Carlo quadratures of the bilinear form.

#include "kinetics/collision.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "kinetics/rng.hpp"

namespace kinetics {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;      // sqrt(2 pi)
constexpr double kGainC2 = 0.7978845608028654;       // sqrt(2 / pi)
constexpr double kLossC1 = 0.19947114020071635;      // pi (2 pi)^{-3/2}
constexpr double kFourPi = 4.0 * std::numbers::pi;

/// Hard caps of build_kernel_matrix: lattices past 41 nodes per axis are
/// never assembled densely, and anything above 256 MiB needs an explicit
/// opt-in so default test runs stay small.
constexpr std::size_t kMaxDenseAxis = 41;
constexpr std::size_t kLargeMatrixBytes = std::size_t{256} * 1024 * 1024;

double sq(double x) { return x * x; }

/// Five monomials spanning the collision invariants: {1, eta, |eta|^2}.
std::array<double, 5> null_monomials(const Vec3& eta) {
    return {1.0, eta.x, eta.y, eta.z, norm2(eta)};
}

/// Quadrature projector onto span{chi_0..chi_4} with the 5x5 lattice Gram
/// system factored once, so the projection is exact on the discrete span.
class InvariantProjector {
  public:
    explicit InvariantProjector(const VelocityGrid& grid) : grid_(&grid) {
        const std::size_t n = grid.size();
        for (auto& c : chi_) c.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < 5; ++k) chi_[k][i] = InvariantBasis::chi(k, grid.nodes[i]);
        }
        Eigen::Matrix<double, 5, 5> gram;
        for (int a = 0; a < 5; ++a) {
            for (int b = a; b < 5; ++b) {
                gram(a, b) = gram(b, a) = grid.inner(chi_[a], chi_[b]);
            }
        }
        solver_ = gram.ldlt();
    }

    std::vector<double> project(const std::vector<double>& u) const {
        const auto c = coefficients(u);
        std::vector<double> out(u.size(), 0.0);
        for (int k = 0; k < 5; ++k) {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[k] * chi_[k][i];
        }
        return out;
    }

    /// u minus its projection, in place.
    void deflate(std::vector<double>& u) const {
        const auto c = coefficients(u);
        for (int k = 0; k < 5; ++k) {
            for (std::size_t i = 0; i < u.size(); ++i) u[i] -= c[k] * chi_[k][i];
        }
    }

  private:
    Eigen::Matrix<double, 5, 1> coefficients(const std::vector<double>& u) const {
        Eigen::Matrix<double, 5, 1> m;
        for (int k = 0; k < 5; ++k) m(k) = grid_->inner(u, chi_[k]);
        return solver_.solve(m);
    }

    const VelocityGrid* grid_;
    std::array<std::vector<double>, 5> chi_;
    Eigen::LDLT<Eigen::Matrix<double, 5, 5>> solver_;
};

/// First-order local invariant coefficients at row i: G has v-profile
/// a + b.eta + g |eta|^2 matching v = u / mu^{1/2} at eta_i to first order
/// (and the Laplacian trace) on interior rows, to zeroth order on hull rows.
struct LocalInvariant {
    double a = 0.0;
    Vec3 b;
    double g = 0.0;
};

std::vector<LocalInvariant> local_invariants(const std::vector<double>& u,
                                             const VelocityGrid& grid,
                                             const std::vector<double>& mu_sqrt) {
    const int n = grid.n;
    const std::size_t total = grid.size();
    std::vector<double> v(total);
    for (std::size_t i = 0; i < total; ++i) v[i] = u[i] / mu_sqrt[i];

    std::vector<LocalInvariant> loc(total);
    const double inv2h = 1.0 / (2.0 * grid.spacing);
    const double invh2 = 1.0 / sq(grid.spacing);
    std::size_t i = 0;
    for (int ix = 0; ix < n; ++ix) {
        for (int iy = 0; iy < n; ++iy) {
            for (int iz = 0; iz < n; ++iz, ++i) {
                const Vec3 eta = grid.nodes[i];
                const bool interior = ix > 0 && ix + 1 < n && iy > 0 && iy + 1 < n &&
                                      iz > 0 && iz + 1 < n;
                if (!interior) {
                    loc[i] = {v[i], Vec3{}, 0.0};
                    continue;
                }
                const std::size_t sx = static_cast<std::size_t>(n) * n;
                const std::size_t sy = n;
                const double vxp = v[i + sx], vxm = v[i - sx];
                const double vyp = v[i + sy], vym = v[i - sy];
                const double vzp = v[i + 1], vzm = v[i - 1];
                const Vec3 grad{(vxp - vxm) * inv2h, (vyp - vym) * inv2h, (vzp - vzm) * inv2h};
                const double lap =
                    (vxp + vxm + vyp + vym + vzp + vzm - 6.0 * v[i]) * invh2;
                const double g = lap / 6.0;
                const Vec3 b = grad - 2.0 * g * eta;
                loc[i] = {v[i] - dot(b, eta) - g * norm2(eta), b, g};
            }
        }
    }
    return loc;
}

/// Combines the cached or freshly accumulated row sums into L u rows and
/// deflates the invariant span. ku holds sum_{j != i} k_ij w_j u_j and
/// rm[k] the matching monomial moments.
std::vector<double> combine_rows(const std::vector<double>& u, const VelocityGrid& grid,
                                 const std::vector<double>& mu_sqrt,
                                 const std::vector<double>& ku,
                                 const std::array<std::vector<double>, 5>& rm) {
    const auto loc = local_invariants(u, grid, mu_sqrt);
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        out[i] = ku[i] - loc[i].a * rm[0][i] - loc[i].b.x * rm[1][i] -
                 loc[i].b.y * rm[2][i] - loc[i].b.z * rm[3][i] - loc[i].g * rm[4][i];
    }
    InvariantProjector(grid).deflate(out);
    return out;
}

void check_slice_size(const std::vector<double>& u, std::size_t n, const char* who) {
    if (u.size() != n) throw std::invalid_argument(std::string(who) + ": slice size mismatch");
}

}  // namespace

double nu_radial(double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("nu_radial: negative radius");
    if (r < 1e-6) return kSqrt2Pi * (2.0 + r * r / 3.0);
    const double erf_part = std::sqrt(std::numbers::pi / 2.0) * std::erf(r / std::numbers::sqrt2);
    return kSqrt2Pi * ((r + 1.0 / r) * erf_part + std::exp(-0.5 * r * r));
}

double nu(const Vec3& eta) { return nu_radial(norm(eta)); }

NuProfile NuProfile::fit(const VelocityGrid& grid) {
    NuProfile p;
    p.nu0 = std::numeric_limits<double>::infinity();
    p.nu1 = 0.0;
    for (const Vec3& eta : grid.nodes) {
        const double r = norm(eta);
        const double value = nu_radial(r);
        p.nu0 = std::min(p.nu0, value);
        p.nu1 = std::max(p.nu1, value / (1.0 + r));
    }
    return p;
}

double kernel_k(const Vec3& eta, const Vec3& eta_star) {
    const Vec3 d = eta - eta_star;
    const double d2 = norm2(d);
    if (d2 == 0.0) throw std::domain_error("kernel_k: singular at coincident velocities");
    const double dn = std::sqrt(d2);
    const double e = norm2(eta);
    const double es = norm2(eta_star);
    const double gain = kGainC2 / dn * std::exp(-sq(es - e) / (8.0 * d2) - d2 / 8.0);
    const double loss = kLossC1 * dn * std::exp(-0.25 * (e + es));
    return gain - loss;
}

double InvariantBasis::chi(int k, const Vec3& eta) {
    const double root = maxwellian_mu_sqrt(eta);
    switch (k) {
        case 0: return root;
        case 1: return eta.x * root;
        case 2: return eta.y * root;
        case 3: return eta.z * root;
        case 4: return (norm2(eta) - 3.0) * root / std::sqrt(6.0);
        default: throw std::invalid_argument("InvariantBasis::chi: index out of range");
    }
}

double InvariantBasis::burnett_a(int j, const Vec3& eta) {
    if (j < 0 || j > 2) throw std::invalid_argument("InvariantBasis::burnett_a: index out of range");
    return eta[j] * (norm2(eta) - 5.0) * maxwellian_mu_sqrt(eta) / std::sqrt(10.0);
}

double InvariantBasis::burnett_b(int k, int l, const Vec3& eta) {
    if (k < 0 || k > 2 || l < 0 || l > 2) {
        throw std::invalid_argument("InvariantBasis::burnett_b: index out of range");
    }
    const double trace = k == l ? norm2(eta) / 3.0 : 0.0;
    return (eta[k] * eta[l] - trace) * maxwellian_mu_sqrt(eta);
}

namespace {

template <typename F>
std::vector<double> sample_slice(const VelocityGrid& grid, F&& f) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(grid.nodes[i]);
    return out;
}

}  // namespace

std::vector<double> InvariantBasis::chi_slice(int k, const VelocityGrid& grid) {
    return sample_slice(grid, [k](const Vec3& eta) { return chi(k, eta); });
}

std::vector<double> InvariantBasis::burnett_a_slice(int j, const VelocityGrid& grid) {
    return sample_slice(grid, [j](const Vec3& eta) { return burnett_a(j, eta); });
}

std::vector<double> InvariantBasis::burnett_b_slice(int k, int l, const VelocityGrid& grid) {
    return sample_slice(grid, [k, l](const Vec3& eta) { return burnett_b(k, l, eta); });
}

KernelMatrix build_kernel_matrix(const VelocityGrid& grid, bool allow_large) {
    const std::size_t n = grid.size();
    if (static_cast<std::size_t>(grid.n) > kMaxDenseAxis) {
        throw std::length_error("build_kernel_matrix: lattice too large for a dense matrix; "
                                "use apply_L_direct");
    }
    const std::size_t bytes = n * n * sizeof(double);
    if (bytes > kLargeMatrixBytes && !allow_large) {
        throw std::invalid_argument("build_kernel_matrix: dense matrix exceeds 256 MiB; "
                                    "pass allow_large to assemble anyway");
    }

    KernelMatrix km;
    km.n_ = n;
    km.grid_ = grid;
    km.raw_.assign(n * n, 0.0);
    km.nu_.resize(n);
    km.mu_sqrt_.resize(n);
    for (auto& m : km.row_moment_) m.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        km.nu_[i] = nu(grid.nodes[i]);
        km.mu_sqrt_[i] = maxwellian_mu_sqrt(grid.nodes[i]);
    }

    // One pass over unordered pairs: k is symmetric, so each evaluation
    // feeds both rows, halving the exp count.
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 ei = grid.nodes[i];
        const auto pi_ = null_monomials(ei);
        const double base_i = grid.weights[i] * km.mu_sqrt_[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = kernel_k(ei, grid.nodes[j]);
            km.raw_[i * n + j] = k * grid.weights[j];
            km.raw_[j * n + i] = k * grid.weights[i];
            const auto pj = null_monomials(grid.nodes[j]);
            const double base_j = k * grid.weights[j] * km.mu_sqrt_[j];
            const double base_ij = k * base_i;
            for (int m = 0; m < 5; ++m) {
                km.row_moment_[m][i] += base_j * pj[m];
                km.row_moment_[m][j] += base_ij * pi_[m];
            }
        }
    }
    // Moment-matched diagonal: the lattice eigenrelation K mu^{1/2} =
    // nu mu^{1/2} absorbs the singular-cell mass exactly.
    for (std::size_t i = 0; i < n; ++i) {
        km.raw_[i * n + i] = km.nu_[i] - km.row_moment_[0][i] / km.mu_sqrt_[i];
    }
    return km;
}

KernelMatrix build_kernel_matrix(const VelocityGrid& grid, const Vec3& y,
                                 const SimParams& params, bool allow_large) {
    KernelMatrix km = build_kernel_matrix(grid, allow_large);
    if (params.beta == 0.0) return km;
    km.phi_.resize(grid.size());
    for (std::size_t i = 0; i < km.phi_.size(); ++i) {
        km.phi_[i] = weight_phi({0.0, y, grid.nodes[i]}, params);
    }
    return km;
}

double KernelMatrix::entry(std::size_t i, std::size_t j) const {
    const double raw = raw_[i * n_ + j];
    if (phi_.empty() || i == j) return raw;
    return raw * phi_[i] / phi_[j];
}

std::vector<double> KernelMatrix::multiply(const std::vector<double>& u) const {
    check_slice_size(u, n_, "KernelMatrix::multiply");
    std::vector<double> scaled;
    const std::vector<double>* in = &u;
    if (!phi_.empty()) {
        scaled.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) scaled[j] = u[j] / phi_[j];
        in = &scaled;
    }
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const double* row = raw_.data() + i * n_;
        double acc = 0.0;
        for (std::size_t j = 0; j < n_; ++j) acc += row[j] * (*in)[j];
        // The diagonal never carries the weight ratio (it is 1 there), so
        // conjugation distributes over the full row product.
        out[i] = phi_.empty() ? acc : acc * phi_[i];
    }
    return out;
}

void KernelMatrix::dump(std::ostream& os) const {
    os << "# dense collision kernel matrix" << (weighted() ? " (weighted)" : "") << "\n";
    os << n_ << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            os << entry(i, j) << (j + 1 == n_ ? '\n' : ' ');
        }
    }
}

std::vector<double> apply_L(const std::vector<double>& u, const KernelMatrix& kernel) {
    const std::size_t n = kernel.size();
    check_slice_size(u, n, "apply_L");
    std::vector<double> plain;
    const std::vector<double>* in = &u;
    if (kernel.weighted()) {
        plain.resize(n);
        for (std::size_t i = 0; i < n; ++i) plain[i] = u[i] / kernel.phi_[i];
        in = &plain;
    }
    std::vector<double> ku(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = kernel.raw_.data() + i * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * (*in)[j];
        ku[i] = acc - row[i] * (*in)[i];  // off-diagonal part only
    }
    std::vector<double> out =
        combine_rows(*in, kernel.grid_, kernel.mu_sqrt_, ku, kernel.row_moment_);
    if (kernel.weighted()) {
        for (std::size_t i = 0; i < n; ++i) out[i] *= kernel.phi_[i];
    }
    return out;
}

std::vector<double> apply_L_direct(const std::vector<double>& u, const VelocityGrid& grid) {
    const std::size_t n = grid.size();
    check_slice_size(u, n, "apply_L_direct");
    std::vector<double> mu_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) mu_sqrt[i] = maxwellian_mu_sqrt(grid.nodes[i]);

    std::vector<double> ku(n, 0.0);
    std::array<std::vector<double>, 5> rm;
    for (auto& m : rm) m.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 ei = grid.nodes[i];
        const auto pi_ = null_monomials(ei);
        const double wi = grid.weights[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = kernel_k(ei, grid.nodes[j]);
            const double kwj = k * grid.weights[j];
            const double kwi = k * wi;
            ku[i] += kwj * u[j];
            ku[j] += kwi * u[i];
            const auto pj = null_monomials(grid.nodes[j]);
            const double bj = kwj * mu_sqrt[j];
            const double bi = kwi * mu_sqrt[i];
            for (int m = 0; m < 5; ++m) {
                rm[m][i] += bj * pj[m];
                rm[m][j] += bi * pi_[m];
            }
        }
    }
    return combine_rows(u, grid, mu_sqrt, ku, rm);
}

std::vector<double> project_P(const std::vector<double>& u, const VelocityGrid& grid) {
    check_slice_size(u, grid.size(), "project_P");
    return InvariantProjector(grid).project(u);
}

double BurnettGram::aa_exact(int j, int i) { return j == i ? 1.0 : 0.0; }

double BurnettGram::ab_exact(int, int, int) { return 0.0; }

double BurnettGram::bb_exact(int i, int j, int k, int l) {
    const auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    return d(i, k) * d(j, l) + d(i, l) * d(j, k) - (2.0 / 3.0) * d(i, j) * d(k, l);
}

void BurnettGram::dump(std::ostream& os) const {
    os.precision(17);
    os << "# burnett gram table\n";
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) os << "AA " << j << ' ' << i << ' ' << aa[j][i] << '\n';
    }
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            for (int l = 0; l < 3; ++l) {
                os << "AB " << j << ' ' << k << ' ' << l << ' ' << ab[j][k][l] << '\n';
            }
        }
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                for (int l = 0; l < 3; ++l) {
                    os << "BB " << i << ' ' << j << ' ' << k << ' ' << l << ' '
                       << bb[i][j][k][l] << '\n';
                }
            }
        }
    }
}

BurnettGram burnette_gram(const VelocityGrid& grid) {
    std::array<std::vector<double>, 3> a;
    std::array<std::array<std::vector<double>, 3>, 3> b;
    for (int j = 0; j < 3; ++j) a[j] = InvariantBasis::burnett_a_slice(j, grid);
    for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) b[k][l] = InvariantBasis::burnett_b_slice(k, l, grid);
    }

    BurnettGram g;
    g.max_deviation = 0.0;
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
            g.aa[j][i] = grid.inner(a[j], a[i]);
            g.max_deviation =
                std::max(g.max_deviation, std::abs(g.aa[j][i] - BurnettGram::aa_exact(j, i)));
        }
    }
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            for (int l = 0; l < 3; ++l) {
                g.ab[j][k][l] = grid.inner(a[j], b[k][l]);
                g.max_deviation = std::max(g.max_deviation, std::abs(g.ab[j][k][l]));
            }
        }
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                for (int l = 0; l < 3; ++l) {
                    g.bb[i][j][k][l] = grid.inner(b[i][j], b[k][l]);
                    g.max_deviation =
                        std::max(g.max_deviation,
                                 std::abs(g.bb[i][j][k][l] - BurnettGram::bb_exact(i, j, k, l)));
                }
            }
        }
    }
    return g;
}

McEstimate q_bilinear_mc(const VelocityProfile& f, const VelocityProfile& g,
                         const Vec3& eta, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("q_bilinear_mc: need at least 2 samples");
    HaltonStream stream(seed, 0);
    const double f_eta = f(eta);
    const double g_eta = g(eta);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t idx = 0; idx < n_samples; ++idx) {
        const Vec3 eta_star = stream.gaussian3(idx);
        const Vec3 omega = stream.sphere(idx);
        const Vec3 rel = eta - eta_star;
        const double c = dot(rel, omega);
        const Vec3 eta_post = eta - c * omega;
        const Vec3 eta_star_post = eta_star + c * omega;
        const double sym = f(eta_post) * g(eta_star_post) + f(eta_star_post) * g(eta_post) -
                           f_eta * g(eta_star) - f(eta_star) * g_eta;
        const double sample = 0.5 * kFourPi * std::abs(c) * sym / maxwellian_mu(eta_star);
        const double delta = sample - mean;
        mean += delta / static_cast<double>(idx + 1);
        m2 += delta * (sample - mean);
    }
    const double nd = static_cast<double>(n_samples);
    return {mean, std::sqrt(m2 / (nd - 1.0) / nd)};
}

McEstimate gamma_mc(const VelocityProfile& g, const VelocityProfile& h,
                    const Vec3& eta, std::size_t n_samples, std::uint64_t seed) {
    const auto weighted = [](const VelocityProfile& p) {
        return [&p](const Vec3& e) { return maxwellian_mu_sqrt(e) * p(e); };
    };
    // q_bilinear_mc integrates the omega-symmetrized integrand over the full
    // sphere; the quadratic term of the fluctuation expansion carries half of
    // that (the linear term carries all of it, which is what apply_L matches).
    McEstimate q = q_bilinear_mc(weighted(g), weighted(h), eta, n_samples, seed);
    const double scale = 0.5 / maxwellian_mu_sqrt(eta);
    return {q.value * scale, q.std_error * scale};
}

McEstimate gamma_phi(const VelocityProfile& w_g, const VelocityProfile& w_h,
                     const FixedPoint& q, const SimParams& params,
                     std::size_t n_samples, std::uint64_t seed) {
    if (params.beta == 0.0) return gamma_mc(w_g, w_h, q.eta, n_samples, seed);
    const Vec3 y = q.y;
    const auto deweighted = [&](const VelocityProfile& p) {
        return [&p, y, &params](const Vec3& e) {
            return p(e) / weight_phi({0.0, y, e}, params);
        };
    };
    McEstimate est = gamma_mc(deweighted(w_g), deweighted(w_h), q.eta, n_samples, seed);
    const double phi = weight_phi({0.0, q.y, q.eta}, params);
    return {est.value * phi, est.std_error * phi};
}

}  // namespace kinetics
