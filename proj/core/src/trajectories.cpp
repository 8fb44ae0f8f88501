/// @file trajectories.cpp
/// @brief Closed-form characteristic tracing in the unit ball.
///
/// PURPOSE: free flight is a harmonic oscillator, so boundary contacts are
/// phase computations on |Y(s)|^2 = A + D cos(2hs - theta). No time stepping
/// happens here; numerical integration and bisection live only in the test
/// oracles that validate these formulas.

#include "kinetics/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace kinetics {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Width of the |e - m - h^2| band classified as grazing.
constexpr double kClassTol = 1e-12;

/// |y| - 1 band treated as "on the boundary" when classifying starts.
constexpr double kBoundaryBand = 1e-10;

/// Below this inter-bounce chord time the orbit is numerically tangent and
/// the remaining path is traced as a free orbit to avoid a bounce storm.
constexpr double kStormGap = 1e-7;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

/// First s > 0 at which the free orbit of (y, eta) crosses |Y(s)| = 1
/// moving outward. Requires a crossing-class orbit (e - m > h^2).
///
/// |Y(s)|^2 = A + D cos(2hs - theta) with A = e/(2h^2) and
/// (D cos theta, D sin theta) = ((h^2|y|^2 - |eta|^2)/(2h^2), y.eta/h).
/// The outward crossing sits at phase -psi (mod 2pi), psi = arccos(-c1),
/// c1 = (e - 2h^2)/sqrt(e^2 - 4h^2 m), because the phase there has
/// cos = -c1 and nonpositive sine, making d|Y|^2/ds nonnegative.
double forward_exit_time(const Vec3& y, const Vec3& eta, double h) {
    const double e = norm2(eta) + h * h * norm2(y);
    const double m = norm2(cross(eta, y));
    const double disc = std::max(e * e - 4.0 * h * h * m, 0.0);
    const double root = std::sqrt(disc);
    const double c1 = clamp_unit((e - 2.0 * h * h) / root);
    const double psi = std::acos(clamp_unit(-c1));
    const double theta = std::atan2(2.0 * h * dot(y, eta), h * h * norm2(y) - norm2(eta));
    double dphi = std::fmod(theta - psi, kTwoPi);
    if (dphi <= 0.0) dphi += kTwoPi;
    return dphi / (2.0 * h);
}

double chord_gap_from(double e, double m, double h) {
    const double disc = std::max(e * e - 4.0 * h * h * m, 0.0);
    const double c1 = clamp_unit((e - 2.0 * h * h) / std::sqrt(disc));
    return std::acos(c1) / h;
}

std::uint64_t splitmix64_local(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

PhasePoint advance_free(const PhasePoint& p, double tau0, double tau, const SimParams& params) {
    const double h = params.h;
    const double c = std::cos(h * (tau - tau0));
    const double s = std::sin(h * (tau - tau0));
    PhasePoint out;
    out.y = p.y * c + p.eta * (s / h);
    out.eta = p.y * (-h * s) + p.eta * c;
    return out;
}

TrajectoryInvariants invariants(const PhasePoint& p, const SimParams& params) {
    const double h = params.h;
    TrajectoryInvariants inv;
    inv.e = norm2(p.eta) + h * h * norm2(p.y);
    inv.m = norm2(cross(p.eta, p.y));
    const double disc = std::max(inv.e * inv.e - 4.0 * h * h * inv.m, 0.0);
    const double root = std::sqrt(disc);
    inv.l_max = std::sqrt((inv.e + root) / (2.0 * h * h));
    inv.l_min = std::sqrt(std::max(inv.e - root, 0.0) / (2.0 * h * h));
    return inv;
}

TrajectoryClass classify_trajectory(const PhasePoint& p, const SimParams& params) {
    const TrajectoryInvariants inv = invariants(p, params);
    const double gap = inv.e - inv.m - params.h * params.h;
    if (gap > kClassTol) return TrajectoryClass::crossing;
    if (gap < -kClassTol) return TrajectoryClass::interior;
    return TrajectoryClass::grazing;
}

BoundaryClass classify_boundary(const PhasePoint& p, const SimParams& params) {
    const double ny = norm(p.y);
    if (ny > 1.0 + 1e-9) throw std::invalid_argument("classify_boundary: |y| > 1");
    if (ny < 1.0 - kBoundaryBand) return BoundaryClass::interior;
    const double c = dot(p.y, p.eta);
    const double tangent_band = 1e-12 * (1.0 + norm(p.eta));
    if (std::abs(c) <= tangent_band) {
        return norm(p.eta) < params.h ? BoundaryClass::gamma_00 : BoundaryClass::gamma_01;
    }
    return c > 0.0 ? BoundaryClass::gamma_plus : BoundaryClass::gamma_minus;
}

Vec3 reflect_specular(const Vec3& y, const Vec3& eta) {
    const double ny = norm(y);
    if (std::abs(ny - 1.0) > 1e-9) {
        throw std::invalid_argument("reflect_specular: point is not on the unit sphere");
    }
    const Vec3 n = y / ny;
    return eta - n * (2.0 * dot(eta, n));
}

BackwardExit backward_exit(const PhasePoint& p, double tau0, const SimParams& params) {
    PhasePoint start = p;
    const double ny = norm(p.y);
    if (ny > 1.0 + 1e-9) throw std::invalid_argument("backward_exit: |y| > 1");
    if (ny >= 1.0 - kBoundaryBand && dot(p.y, p.eta) < 0.0) {
        start.eta = reflect_specular(p.y, p.eta);
    }
    if (classify_trajectory(start, params) != TrajectoryClass::crossing) {
        throw std::domain_error("backward_exit: orbit never reaches the boundary");
    }
    const double s = forward_exit_time(start.y, -1.0 * start.eta, params.h);
    BackwardExit exit;
    exit.tau_b = s;
    const PhasePoint hit = advance_free(start, tau0, tau0 - s, params);
    exit.y_b = hit.y;
    exit.eta_b = hit.eta;
    return exit;
}

BackwardPath::BackwardPath(double tau0, const PhasePoint& p, const SimParams& params,
                           std::size_t max_bounces, ReflectionRule rule)
    : tau0_(tau0), origin_(p), params_(params) {
    if (!(tau0 > 0.0) || !(tau0 < params.tau_horizon())) {
        throw std::invalid_argument("BackwardPath: tau0 outside (0, pi/(2h))");
    }
    const double ny = norm(p.y);
    if (ny > 1.0 + 1e-9) throw std::invalid_argument("BackwardPath: |y| > 1");

    PhasePoint state = p;
    double anchor_tau = tau0;

    if (ny >= 1.0 - kBoundaryBand) {
        const BoundaryClass bc = classify_boundary(p, params);
        if (bc == BoundaryClass::gamma_01) {
            throw std::domain_error("BackwardPath: singular tangential start");
        }
        if (bc == BoundaryClass::gamma_minus) {
            // Backward tracing treats an incoming boundary point as having
            // just reflected, so the contact is recorded at tau0 itself.
            const Vec3 eta_post = rule == ReflectionRule::specular
                                      ? reflect_specular(p.y, p.eta)
                                      : -1.0 * p.eta;
            events_.push_back({tau0, p.y, p.eta, eta_post, false});
            state.eta = eta_post;
        }
    }

    cls_ = classify_trajectory(state, params);
    if (cls_ == TrajectoryClass::crossing) {
        const TrajectoryInvariants inv = invariants(state, params);
        chord_gap_ = chord_gap_from(inv.e, inv.m, params.h);
        while (true) {
            const double s = forward_exit_time(state.y, -1.0 * state.eta, params.h);
            const double tau_hit = anchor_tau - s;
            if (tau_hit <= 0.0) break;
            const PhasePoint hit = advance_free(state, anchor_tau, tau_hit, params);
            if (chord_gap_ < kStormGap) {
                // Numerically tangent orbit: record the touch and continue as
                // free flight instead of resolving millions of micro-chords.
                events_.push_back({tau_hit, hit.y, hit.eta, hit.eta, true});
                break;
            }
            const Vec3 eta_post = rule == ReflectionRule::specular
                                      ? reflect_specular(hit.y, hit.eta)
                                      : -1.0 * hit.eta;
            events_.push_back({tau_hit, hit.y, hit.eta, eta_post, false});
            if (events_.size() > max_bounces) {
                throw std::runtime_error("BackwardPath: bounce count exceeded max_bounces");
            }
            state = {hit.y, eta_post};
            anchor_tau = tau_hit;
        }
    }
}

PhasePoint BackwardPath::at(double tau) const {
    if (tau < -1e-12 || tau > tau0_ + 1e-12) {
        throw std::out_of_range("BackwardPath::at: tau outside [0, tau0]");
    }
    tau = std::clamp(tau, 0.0, tau0_);
    // Events are stored in decreasing tau order; the segment anchor is the
    // last event at or after tau, or the origin if there is none.
    const auto it = std::partition_point(events_.begin(), events_.end(),
                                         [tau](const BounceEvent& ev) { return ev.tau >= tau; });
    if (it == events_.begin()) {
        return advance_free(origin_, tau0_, tau, params_);
    }
    const BounceEvent& ev = *(it - 1);
    return advance_free({ev.y, ev.eta}, ev.tau, tau, params_);
}

void BackwardPath::dump(std::ostream& os) const {
    os << std::setprecision(17);
    for (const BounceEvent& ev : events_) {
        os << ev.tau << ' ' << ev.y.x << ' ' << ev.y.y << ' ' << ev.y.z << ' ' << ev.eta.x << ' '
           << ev.eta.y << ' ' << ev.eta.z << '\n';
    }
}

ASetParams ASetParams::make(double kappa, double N, const SimParams& params) {
    if (!(kappa > 0.0)) throw std::invalid_argument("ASetParams: kappa must be positive");
    if (!(N >= params.h)) throw std::invalid_argument("ASetParams: need N >= h");
    ASetParams aset;
    aset.kappa = kappa;
    aset.N = N;
    aset.delta = params.h * params.h * kappa / (N * N);
    return aset;
}

bool in_a_set(const PhasePoint& p, const ASetParams& aset, const SimParams& params) {
    if (norm(p.y) > 1.0) return false;
    const double speed = norm(p.eta);
    if (speed < 2.0 * params.h || speed > 2.0 * aset.N) return false;
    const TrajectoryInvariants inv = invariants(p, params);
    return inv.e - inv.m >= params.h * params.h + aset.kappa * aset.kappa;
}

VelocityLemmaReport velocity_lemma_report(double tau0, const PhasePoint& p,
                                          const ASetParams& aset, const SimParams& params) {
    if (!in_a_set(p, aset, params)) {
        throw std::invalid_argument("velocity_lemma_report: point is not in the A-set");
    }
    const double h = params.h;
    const double count_bound = kPi * aset.N * aset.N / (h * aset.kappa);
    const std::size_t max_bounces =
        static_cast<std::size_t>(4.0 * std::ceil(count_bound));

    VelocityLemmaReport rep;
    const BackwardPath path(tau0, p, params, max_bounces);

    rep.delta_tau = path.chord_gap();
    rep.bounce_count = path.events().size();
    rep.gap_lower_ok = rep.delta_tau >= aset.kappa / (2.0 * aset.N * aset.N) - 1e-12;
    rep.gap_upper_ok = rep.delta_tau <= kPi / (2.0 * h) + 1e-12;
    rep.count_ok = static_cast<double>(rep.bounce_count) <= count_bound;
    rep.excluded_measure = 2.0 * aset.delta * static_cast<double>(rep.bounce_count);
    rep.measure_ok = rep.excluded_measure <= 2.0 * kPi * h + 1e-12;

    // Clause (c): away from every bounce by delta, the position is uniformly
    // inside and pairs with any shell velocity at margin (h^2 kappa / N)^2.
    const double margin_bound = std::pow(h * h * aset.kappa / aset.N, 2);
    const double rlo = 2.0 * h;
    const double rhi = 2.0 * aset.N;
    std::mt19937_64 gen(splitmix64_local(params.seed ^ 0x76a5c3e1d2b49f08ULL));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    rep.min_window_margin = std::numeric_limits<double>::infinity();
    rep.window_ok = true;

    const auto& events = path.events();
    for (std::size_t i = 1; i < events.size(); ++i) {
        const double lo = events[i].tau + aset.delta;
        const double hi = events[i - 1].tau - aset.delta;
        if (hi - lo <= 1e-9) continue;
        ++rep.windows_checked;
        for (double frac : {0.25, 0.5, 0.75}) {
            const double tau = lo + frac * (hi - lo);
            const Vec3 y = path.at(tau).y;
            const double h2y2 = h * h * norm2(y);
            for (int draw = 0; draw < 100; ++draw) {
                const double z = 2.0 * unif(gen) - 1.0;
                const double phi = kTwoPi * unif(gen);
                const double rho = std::sqrt(std::max(1.0 - z * z, 0.0));
                const double r =
                    std::cbrt(std::pow(rlo, 3) + unif(gen) * (std::pow(rhi, 3) - std::pow(rlo, 3)));
                const Vec3 ep{r * rho * std::cos(phi), r * rho * std::sin(phi), r * z};
                const double margin = norm2(ep) + h2y2 - norm2(cross(ep, y)) - h * h;
                rep.min_window_margin = std::min(rep.min_window_margin, margin);
                if (margin < margin_bound - 1e-12) rep.window_ok = false;
            }
        }
    }
    if (rep.windows_checked == 0) rep.min_window_margin = 0.0;

    rep.pass = rep.gap_lower_ok && rep.gap_upper_ok && rep.count_ok && rep.window_ok &&
               rep.measure_ok;
    if (!rep.gap_lower_ok) {
        rep.failure = "chord gap below kappa/(2N^2)";
    } else if (!rep.gap_upper_ok) {
        rep.failure = "chord gap above pi/(2h)";
    } else if (!rep.count_ok) {
        rep.failure = "bounce count above pi N^2/(h kappa)";
    } else if (!rep.window_ok) {
        rep.failure = "window margin below (h^2 kappa/N)^2";
    } else if (!rep.measure_ok) {
        rep.failure = "excluded measure above 2 pi h";
    }
    return rep;
}

namespace {

std::vector<ContinuityModuli> probe_impl(double tau0, const PhasePoint& center, const Vec3& dy,
                                         const Vec3& deta, const std::vector<double>& eps_list,
                                         const SimParams& params, ReflectionRule rule) {
    constexpr int kSamples = 400;
    const BackwardPath base(tau0, center, params, 1000000, rule);
    std::vector<ContinuityModuli> rows;
    rows.reserve(eps_list.size());
    for (double eps : eps_list) {
        const PhasePoint plus{center.y + eps * dy, center.eta + eps * deta};
        const PhasePoint minus{center.y - eps * dy, center.eta - eps * deta};
        const BackwardPath path_p(tau0, plus, params, 1000000, rule);
        const BackwardPath path_m(tau0, minus, params, 1000000, rule);
        ContinuityModuli row;
        row.eps = eps;
        for (int j = 0; j < kSamples; ++j) {
            const double tau = tau0 * static_cast<double>(j) / (kSamples - 1);
            const Vec3 yc = base.at(tau).y;
            const Vec3 yp = path_p.at(tau).y;
            const Vec3 ym = path_m.at(tau).y;
            row.d_plus = std::max(row.d_plus, norm(yc - yp));
            row.d_minus = std::max(row.d_minus, norm(yc - ym));
            row.d_pair = std::max(row.d_pair, norm(yp - ym));
        }
        row.ratio = std::max({row.d_plus, row.d_minus, row.d_pair}) / eps;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

std::vector<ContinuityModuli> continuity_probe(double tau0, const PhasePoint& center,
                                               const Vec3& dy, const Vec3& deta,
                                               const std::vector<double>& eps_list,
                                               const SimParams& params) {
    return probe_impl(tau0, center, dy, deta, eps_list, params, ReflectionRule::specular);
}

std::vector<ContinuityModuli> reverse_reflection_probe(double tau0, const PhasePoint& center,
                                                       const Vec3& dy, const Vec3& deta,
                                                       const std::vector<double>& eps_list,
                                                       const SimParams& params) {
    return probe_impl(tau0, center, dy, deta, eps_list, params, ReflectionRule::reverse);
}

double double_backtrack_jacobian(double tau, const PhasePoint& p, double tau1, double tau2,
                                 const Vec3& eta_prime, const SimParams& params) {
    if (!(0.0 <= tau2 && tau2 < tau1 && tau1 < tau)) {
        throw std::invalid_argument("double_backtrack_jacobian: need 0 <= tau2 < tau1 < tau");
    }
    const BackwardPath first_leg(tau, p, params);
    const Vec3 y1 = first_leg.at(tau1).y;

    const auto position_at_tau2 = [&](const Vec3& ep) {
        const BackwardPath leg(tau1, {y1, ep}, params);
        for (const BounceEvent& ev : leg.events()) {
            if (ev.tau > tau2 + 1e-12) {
                throw std::domain_error(
                    "double_backtrack_jacobian: bounce between tau2 and tau1");
            }
        }
        return leg.at(tau2).y;
    };

    position_at_tau2(eta_prime);  // reject a bouncing base configuration up front

    constexpr double kStep = 1e-5;
    double jac[3][3];
    for (int k = 0; k < 3; ++k) {
        Vec3 ep_hi = eta_prime;
        Vec3 ep_lo = eta_prime;
        (k == 0 ? ep_hi.x : k == 1 ? ep_hi.y : ep_hi.z) += kStep;
        (k == 0 ? ep_lo.x : k == 1 ? ep_lo.y : ep_lo.z) -= kStep;
        const Vec3 hi = position_at_tau2(ep_hi);
        const Vec3 lo = position_at_tau2(ep_lo);
        const Vec3 col = (hi - lo) / (2.0 * kStep);
        jac[0][k] = col.x;
        jac[1][k] = col.y;
        jac[2][k] = col.z;
    }
    return jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) -
           jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0]) +
           jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
}

}  // namespace kinetics
