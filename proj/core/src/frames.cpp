#include "kinetics/frames.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kinetics {

namespace {
constexpr double two_pi_pow_neg_3_2 = 0.06349363593424097;  // (2 pi)^{-3/2}
}

double ball_radius(double t, const SimParams& params) {
    return std::sqrt(1.0 + params.h * params.h * t * t);
}

FixedPoint to_fixed_frame(const LabPoint& p, const SimParams& params) {
    const double h = params.h;
    const double R = ball_radius(p.t, params);
    if (norm(p.x) > R * (1.0 + 1e-12))
        throw std::invalid_argument("to_fixed_frame: |x| exceeds the ball radius R(t)");

    FixedPoint q;
    q.tau = std::atan(h * p.t) / h;
    q.y = p.x / R;
    q.eta = R * p.xi - (h * h * p.t / R) * p.x;
    return q;
}

LabPoint to_lab_frame(const FixedPoint& q, const SimParams& params) {
    const double h = params.h;
    if (q.tau >= params.tau_horizon())
        throw std::invalid_argument("to_lab_frame: tau must be below pi/(2h)");
    if (q.tau < 0.0) throw std::invalid_argument("to_lab_frame: tau must be nonnegative");
    if (norm(q.y) > 1.0 + 1e-12)
        throw std::invalid_argument("to_lab_frame: |y| exceeds the unit ball");

    LabPoint p;
    p.t = std::tan(h * q.tau) / h;
    const double R = ball_radius(p.t, params);
    p.x = R * q.y;
    p.xi = (q.eta + (h * h * p.t) * q.y) / R;
    return p;
}

double maxwellian_mu(const Vec3& eta) {
    return two_pi_pow_neg_3_2 * std::exp(-0.5 * norm2(eta));
}

double maxwellian_mu_sqrt(const Vec3& eta) { return std::sqrt(maxwellian_mu(eta)); }

double mu_tilde(const Vec3& y, const SimParams& params) {
    return std::exp(-0.5 * params.h * params.h * norm2(y));
}

double mu_tilde_sqrt(const Vec3& y, const SimParams& params) {
    return std::exp(-0.25 * params.h * params.h * norm2(y));
}

double traveling_maxwellian(const LabPoint& p, const SimParams& params) {
    const double h = params.h;
    const Vec3 shift = p.x - p.t * p.xi;
    return two_pi_pow_neg_3_2 * std::exp(-0.5 * norm2(p.xi) - 0.5 * h * h * norm2(shift));
}

MacroState moments(const std::vector<double>& f_slice, const VelocityGrid& grid) {
    const double rho = grid.integrate(f_slice);

    MacroState m;
    if (rho < 1e-14) {
        m.degenerate = true;
        return m;
    }
    m.rho = rho;

    Vec3 momentum;
    for (std::size_t i = 0; i < grid.size(); ++i)
        momentum += (grid.weights[i] * f_slice[i]) * grid.nodes[i];
    m.v = momentum / rho;

    double e = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        e += grid.weights[i] * f_slice[i] * 0.5 * norm2(grid.nodes[i] - m.v);
    m.theta = e / rho;
    return m;
}

double alpha(double tau, const SimParams& params) {
    const double h = params.h;
    return 0.5 * tau + std::sin(2.0 * h * tau) / (4.0 * h);
}

double weight_phi(const FixedPoint& q, const SimParams& params) {
    const double h = params.h;
    const double s = 1.0 + norm2(q.eta) + h * h * norm2(q.y);
    return std::pow(s, 0.5 * params.beta);
}

DensityBounds density_bounds_check(const std::vector<DensitySample>& series,
                                   const SimParams& params) {
    if (series.empty())
        throw std::invalid_argument("density_bounds_check: empty sample series");

    DensityBounds b;
    b.c0 = std::numeric_limits<double>::infinity();
    b.C0 = 0.0;
    for (const auto& s : series) {
        if (!(s.rho > 0.0))
            throw std::invalid_argument("density_bounds_check: nonpositive density sample");
        const double R = ball_radius(s.t, params);
        const double scaled = s.rho * R * R * R;
        b.c0 = std::min(b.c0, scaled);
        b.C0 = std::max(b.C0, scaled);
    }
    b.pass = std::isfinite(b.C0) && b.c0 > 0.0;
    return b;
}

}  // namespace kinetics
