/// @file test_trajectories.cpp
/// @brief Characteristic flow, boundary exits, bounces, continuity moduli.
///
/// PURPOSE: pins the closed-form harmonic flight and boundary bookkeeping
/// against integration oracles that share no code with the library: RK4 time
/// stepping for the flow, marching bisection for exit times, and finite
/// differences for the backtrack Jacobian.
///
/// VALIDATES:
///  - advance_free agrees with RK4 and conserves the two orbit invariants.
///  - backward_exit reproduces pinned chords and the bisection oracle.
///  - BackwardPath bounce events keep unit contact radius, invariant e and m,
///    equal chord gaps, and the incoming/outgoing velocity signs.
///  - velocity_lemma_report certifies the chord-gap, count, window-margin,
///    and excluded-measure bounds on uniformly non-grazing starts.
///  - continuity moduli: Lipschitz away from tangency, square-root at a
///    tangential contact, order-one gap under the reverse reflection rule.
///  - double_backtrack_jacobian equals (sin(h dt)/h)^3.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "kinetics/trajectories.hpp"
#include "oracles.hpp"

using namespace kinetics;

namespace {

constexpr double kPi = std::numbers::pi;

SimParams params_with_h(double h) {
    SimParams p;
    p.h = h;
    return p;
}

double dist(const Vec3& a, const Vec3& b) { return norm(a - b); }

Vec3 random_in_ball(std::mt19937_64& gen, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        Vec3 v{u(gen), u(gen), u(gen)};
        if (norm2(v) <= 1.0) return radius * v;
    }
}

std::array<double, 6> pack(const PhasePoint& p) {
    return {p.y.x, p.y.y, p.y.z, p.eta.x, p.eta.y, p.eta.z};
}

}  // namespace

TEST_CASE("advance_free matches RK4 and conserves the orbit invariants") {
    const SimParams P = params_with_h(0.7);
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto rhs = [&P](double, const std::array<double, 6>& s) -> std::array<double, 6> {
        const double hh = P.h * P.h;
        return {s[3], s[4], s[5], -hh * s[0], -hh * s[1], -hh * s[2]};
    };
    for (int trial = 0; trial < 100; ++trial) {
        const PhasePoint p{random_in_ball(gen, 0.9), {1.5 * u(gen), 1.5 * u(gen), 1.5 * u(gen)}};
        const double tau0 = 0.3;
        const double tau = tau0 + 2.0 * u(gen);
        const PhasePoint q = advance_free(p, tau0, tau, P);
        const auto ref = oracles::rk4_integrate<6>(rhs, pack(p), tau0, tau, 1e-4);
        const auto got = pack(q);
        for (int i = 0; i < 6; ++i) CHECK(std::abs(got[i] - ref[i]) <= 1e-8 * (1.0 + std::abs(ref[i])));
        const TrajectoryInvariants a = invariants(p, P);
        const TrajectoryInvariants b = invariants(q, P);
        CHECK(std::abs(a.e - b.e) <= 1e-10);
        CHECK(std::abs(a.m - b.m) <= 1e-10);
    }
    // Full period 2 pi / h returns the state exactly.
    const PhasePoint p{{0.4, -0.2, 0.1}, {0.8, 0.3, -0.5}};
    const PhasePoint back = advance_free(p, 0.0, 2.0 * kPi / P.h, P);
    CHECK(dist(back.y, p.y) <= 1e-9);
    CHECK(dist(back.eta, p.eta) <= 1e-9);
}

TEST_CASE("invariants pin the ellipse axes and the class split") {
    const SimParams P1 = params_with_h(1.0);
    const TrajectoryInvariants rad = invariants({{0, 0, 0}, {2, 0, 0}}, P1);
    CHECK(std::abs(rad.e - 4.0) <= 1e-14);
    CHECK(std::abs(rad.m) <= 1e-14);
    CHECK(std::abs(rad.l_max - 2.0) <= 1e-14);
    CHECK(std::abs(rad.l_min) <= 1e-14);
    CHECK(classify_trajectory({{0, 0, 0}, {2, 0, 0}}, P1) == TrajectoryClass::crossing);

    const PhasePoint ell{{0.6, 0, 0}, {0, 0.8, 0}};
    const TrajectoryInvariants inv = invariants(ell, P1);
    CHECK(std::abs(inv.e - 1.0) <= 1e-14);
    CHECK(std::abs(inv.m - 0.2304) <= 1e-14);
    CHECK(std::abs(inv.l_max - 0.8) <= 1e-12);
    CHECK(std::abs(inv.l_min - 0.6) <= 1e-12);
    CHECK(classify_trajectory(ell, P1) == TrajectoryClass::interior);

    // The RK4-tracked maximum radius over one period is the major semi-axis.
    const auto rhs = [](double, const std::array<double, 6>& s) -> std::array<double, 6> {
        return {s[3], s[4], s[5], -s[0], -s[1], -s[2]};
    };
    double max_r = 0.0;
    std::array<double, 6> state = pack(ell);
    const double dt = 1e-3;
    for (double s = 0.0; s < 2.0 * kPi; s += dt) {
        state = oracles::rk4_integrate<6>(rhs, state, s, s + dt, dt);
        max_r = std::max(max_r, std::sqrt(state[0] * state[0] + state[1] * state[1] +
                                          state[2] * state[2]));
    }
    CHECK(std::abs(max_r - inv.l_max) <= 1e-6);

    // Speed h at radius 0.6 pericenter gives a tangentially touching orbit.
    const SimParams P = params_with_h(0.5);
    CHECK(classify_trajectory({{0.6, 0, 0}, {0, 0.5, 0}}, P) == TrajectoryClass::grazing);
    CHECK(classify_trajectory({{0.6, 0, 0}, {0, 0.51, 0}}, P) == TrajectoryClass::crossing);
    CHECK(classify_trajectory({{0.6, 0, 0}, {0, 0.49, 0}}, P) == TrajectoryClass::interior);
}

TEST_CASE("backward exit reproduces the pinned chords") {
    const SimParams P1 = params_with_h(1.0);
    const BackwardExit a = backward_exit({{0, 0, 0}, {2, 0, 0}}, 1.0, P1);
    CHECK(std::abs(a.tau_b - kPi / 6.0) <= 1e-12);
    CHECK(dist(a.y_b, {-1, 0, 0}) <= 1e-12);
    CHECK(dist(a.eta_b, {std::sqrt(3.0), 0, 0}) <= 1e-12);

    // An incoming boundary start reflects first, then crosses the full chord.
    const BackwardExit b = backward_exit({{1, 0, 0}, {-2, 0, 0}}, 1.0, P1);
    CHECK(std::abs(b.tau_b - std::acos(0.6)) <= 1e-12);
    CHECK(dist(b.y_b, {-1, 0, 0}) <= 1e-12);
    CHECK(dist(b.eta_b, {2, 0, 0}) <= 1e-12);
    CHECK(dot(b.y_b, b.eta_b) < 0.0);

    CHECK_THROWS_AS(backward_exit({{0.6, 0, 0}, {0, 0.8, 0}}, 1.0, P1), std::domain_error);
    const SimParams P = params_with_h(0.5);
    CHECK_THROWS_AS(backward_exit({{0.6, 0, 0}, {0, 0.5, 0}}, 1.0, P), std::domain_error);
}

TEST_CASE("backward exit agrees with the marching bisection oracle") {
    const SimParams P = params_with_h(0.5);
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int tested = 0;
    while (tested < 300) {
        const PhasePoint p{random_in_ball(gen, 0.9), {2.0 * u(gen), 2.0 * u(gen), 2.0 * u(gen)}};
        const TrajectoryInvariants inv = invariants(p, P);
        if (inv.e - inv.m - P.h * P.h < 1e-3) continue;
        ++tested;
        const BackwardExit exit = backward_exit(p, 2.0, P);
        const oracles::ExitOracle ref =
            oracles::backward_exit_rk4({p.y.x, p.y.y, p.y.z}, {p.eta.x, p.eta.y, p.eta.z}, P.h);
        CHECK(std::abs(exit.tau_b - ref.tau_b) <= 1e-9);
        CHECK(dist(exit.y_b, {ref.y[0], ref.y[1], ref.y[2]}) <= 1e-8);
        CHECK(dist(exit.eta_b, {ref.eta[0], ref.eta[1], ref.eta[2]}) <= 1e-8);
    }
}

TEST_CASE("specular reflection is an involution preserving e and m") {
    const SimParams P = params_with_h(0.8);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vec3 y{u(gen), u(gen), u(gen)};
        y = y / norm(y);
        const Vec3 eta{2.0 * u(gen), 2.0 * u(gen), 2.0 * u(gen)};
        const Vec3 r = reflect_specular(y, eta);
        CHECK(dist(reflect_specular(y, r), eta) <= 1e-13);
        const TrajectoryInvariants a = invariants({y, eta}, P);
        const TrajectoryInvariants b = invariants({y, r}, P);
        CHECK(std::abs(a.e - b.e) <= 1e-13);
        CHECK(std::abs(a.m - b.m) <= 1e-13);
        CHECK(std::abs(dot(y, r) + dot(y, eta)) <= 1e-13);
    }
    // Tangential velocities are fixed points; normal ones flip.
    const Vec3 n{0, 0, 1};
    CHECK(dist(reflect_specular(n, {0.3, -0.2, 0}), {0.3, -0.2, 0}) <= 1e-15);
    CHECK(dist(reflect_specular(n, {0, 0, 2}), {0, 0, -2}) <= 1e-15);
    CHECK_THROWS_AS(reflect_specular({0.5, 0, 0}, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("backward path bookkeeping on a multi-bounce crossing orbit") {
    const SimParams P = params_with_h(0.5);
    const PhasePoint p{{0.3, 0, 0}, {1.2, 0.4, 0}};
    const double tau0 = 3.0;
    const BackwardPath path(tau0, p, P);
    CHECK(path.trajectory_class() == TrajectoryClass::crossing);
    const auto& ev = path.events();
    REQUIRE(ev.size() >= 2);
    const TrajectoryInvariants inv0 = invariants(p, P);
    for (std::size_t i = 0; i < ev.size(); ++i) {
        CHECK(std::abs(norm(ev[i].y) - 1.0) <= 1e-10);
        CHECK(dot(ev[i].y, ev[i].eta) >= 0.0);
        CHECK(dot(ev[i].y, ev[i].eta_pre) <= 0.0);
        const TrajectoryInvariants inv = invariants({ev[i].y, ev[i].eta}, P);
        CHECK(std::abs(inv.e - inv0.e) <= 1e-10);
        CHECK(std::abs(inv.m - inv0.m) <= 1e-10);
        if (i > 0) {
            CHECK(ev[i].tau < ev[i - 1].tau);
            CHECK(std::abs((ev[i - 1].tau - ev[i].tau) - path.chord_gap()) <= 1e-10);
        }
    }
    // Interior start: the first segment is plain free flight from the origin.
    CHECK(dist(path.at(tau0).y, p.y) <= 1e-15);
    const double mid = 0.5 * (tau0 + ev[0].tau);
    CHECK(dist(path.at(mid).y, advance_free(p, tau0, mid, P).y) <= 1e-14);
    // Position is continuous across a bounce; velocity switches branches.
    const BounceEvent& e0 = ev[0];
    CHECK(dist(path.at(e0.tau + 1e-9).y, e0.y) <= 1e-8);
    CHECK(dist(path.at(e0.tau - 1e-9).y, e0.y) <= 1e-8);
    CHECK(dist(path.at(e0.tau + 1e-9).eta, e0.eta_pre) <= 1e-7);
    CHECK(dist(path.at(e0.tau - 1e-9).eta, e0.eta) <= 1e-7);
    CHECK_THROWS_AS(path.at(-0.1), std::out_of_range);
    CHECK_THROWS_AS(path.at(tau0 + 0.1), std::out_of_range);

    std::ostringstream oss;
    path.dump(oss);
    std::istringstream iss(oss.str());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(iss, line)) {
        std::istringstream row(line);
        double v = 0.0;
        int fields = 0;
        while (row >> v) ++fields;
        CHECK(fields == 7);
        ++lines;
    }
    CHECK(lines == ev.size());
}

TEST_CASE("boundary starts insert or skip the initial reflection") {
    const SimParams P = params_with_h(0.5);
    const double tau0 = 3.0;

    const PhasePoint incoming{{1, 0, 0}, {-2, 0.3, 0}};
    const BackwardPath minus(tau0, incoming, P);
    REQUIRE(!minus.events().empty());
    CHECK(minus.events()[0].tau == tau0);
    CHECK(dist(minus.events()[0].eta, reflect_specular(incoming.y, incoming.eta)) <= 1e-15);

    const PhasePoint outgoing{{1, 0, 0}, {1.2, 0.8, 0}};
    const BackwardPath plus(tau0, outgoing, P);
    REQUIRE(!plus.events().empty());
    CHECK(plus.events()[0].tau < tau0 - 1e-9);
    CHECK(std::abs((tau0 - plus.events()[0].tau) - plus.chord_gap()) <= 1e-10);

    const PhasePoint slow_tangent{{1, 0, 0}, {0, 0.3, 0}};
    const BackwardPath graze(tau0, slow_tangent, P);
    CHECK(graze.trajectory_class() == TrajectoryClass::grazing);
    CHECK(graze.events().empty());
    CHECK(dist(graze.at(1.0).y, advance_free(slow_tangent, tau0, 1.0, P).y) <= 1e-14);

    CHECK_THROWS_AS(BackwardPath(tau0, {{1, 0, 0}, {0, 2, 0}}, P), std::domain_error);
    CHECK_THROWS_AS(BackwardPath(tau0, {{1, 0, 0}, {-0.1, 2, 0}}, P, 2), std::runtime_error);
    CHECK_THROWS_AS(BackwardPath(-1.0, incoming, P), std::invalid_argument);
    CHECK_THROWS_AS(BackwardPath(kPi, incoming, P), std::invalid_argument);
}

TEST_CASE("a-set membership and the chord-gap limits") {
    const SimParams P = params_with_h(0.5);
    const ASetParams aset = ASetParams::make(0.1, 2.0, P);
    CHECK(std::abs(aset.delta - 0.00625) <= 1e-15);

    CHECK(in_a_set({{0.3, 0.2, -0.1}, {1.5, 0.3, 0.2}}, aset, P));
    CHECK(!in_a_set({{0.3, 0.2, -0.1}, {0.5, 0, 0}}, aset, P));     // too slow
    CHECK(!in_a_set({{0.3, 0.2, -0.1}, {5, 0, 0}}, aset, P));       // too fast
    CHECK(!in_a_set({{0.998, 0, 0}, {0, 1.5, 0}}, aset, P));        // near tangent

    // Radial orbits: the chord is the double arcsine of h over the speed.
    for (double v : {1.2, 1.5, 3.0}) {
        const BackwardPath path(2.0, {{0, 0, 0}, {v, 0, 0}}, P);
        CHECK(std::abs(path.chord_gap() - 2.0 * std::asin(P.h / v) / P.h) <= 1e-12);
    }
    // Slow radial orbits approach the half-period bound from below.
    double prev = 0.0;
    for (double s : {0.3, 0.1, 0.03, 0.01}) {
        const double v = P.h * std::sqrt(2.0) * (1.0 + s);
        const BackwardPath path(2.0, {{0, 0, 0}, {v, 0, 0}}, P);
        CHECK(path.chord_gap() > prev);
        CHECK(path.chord_gap() <= kPi / (2.0 * P.h));
        prev = path.chord_gap();
    }
    CHECK(prev >= 0.95 * kPi / (2.0 * P.h));
}

TEST_CASE("velocity lemma certificate passes on non-grazing starts") {
    const SimParams P = params_with_h(0.5);
    const ASetParams aset = ASetParams::make(0.1, 2.0, P);
    const double tau0 = 0.95 * kPi;

    const PhasePoint pinned{{0.3, 0.2, -0.1}, {1.5, 0.3, 0.2}};
    const VelocityLemmaReport rep = velocity_lemma_report(tau0, pinned, aset, P);
    CHECK(rep.pass);
    CHECK(rep.failure.empty());
    CHECK(rep.bounce_count <= 251);
    CHECK(rep.windows_checked >= 1);
    CHECK(rep.min_window_margin >= std::pow(P.h * P.h * aset.kappa / aset.N, 2) - 1e-12);

    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int tested = 0;
    while (tested < 50) {
        const Vec3 y = random_in_ball(gen, 0.999);
        const double z = 2.0 * u(gen) - 1.0;
        const double phi = 2.0 * kPi * u(gen);
        const double r = 2.0 * P.h + (2.0 * aset.N - 2.0 * P.h) * u(gen);
        const double rho = std::sqrt(std::max(1.0 - z * z, 0.0));
        const Vec3 eta{r * rho * std::cos(phi), r * rho * std::sin(phi), r * z};
        if (!in_a_set({y, eta}, aset, P)) continue;
        ++tested;
        const VelocityLemmaReport r2 = velocity_lemma_report(tau0, {y, eta}, aset, P);
        CHECK(r2.pass);
        if (!r2.pass) MESSAGE("clause failed: " << r2.failure);
    }

    CHECK_THROWS_AS(velocity_lemma_report(tau0, {{0, 0, 0}, {0.1, 0, 0}}, aset, P),
                    std::invalid_argument);
}

TEST_CASE("continuity moduli stay Lipschitz away from tangency") {
    const SimParams P = params_with_h(0.5);
    const std::vector<double> eps{1e-2, 1e-3, 1e-4};

    // Interior-class center: pure free flight, exactly linear response.
    const PhasePoint interior{{0.2, 0.1, 0}, {0.05, 0.1, 0}};
    REQUIRE(classify_trajectory(interior, P) == TrajectoryClass::interior);
    const auto rows_i =
        continuity_probe(2.5, interior, {0.1, 0, 0}, {0.15, 0.1, 0}, eps, P);
    double lo = rows_i[0].ratio, hi = rows_i[0].ratio;
    for (const auto& row : rows_i) {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
    }
    CHECK(hi / lo <= 1.01);

    // Transversal-crossing center: bounces far from tangency stay Lipschitz.
    const PhasePoint crossing{{0.3, 0, 0}, {1.2, 0.4, 0}};
    const auto rows_c =
        continuity_probe(2.5, crossing, {0.05, 0.05, 0}, {0.1, -0.05, 0.05}, eps, P);
    lo = hi = rows_c[0].ratio;
    for (const auto& row : rows_c) {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
    }
    CHECK(hi / lo < 2.0);
}

TEST_CASE("a tangential contact degrades the modulus to a square root") {
    const SimParams P = params_with_h(0.5);
    // Probe center 2.2 before the pericenter of the grazing orbit through
    // y = (0.6, 0, 0) at speed h; the touch sits at backward time ~0.94.
    const PhasePoint peri{{0.6, 0, 0}, {0, 0.5, 0}};
    const PhasePoint center = advance_free(peri, 0.0, -2.2, P);
    const PhasePoint dir = advance_free({{0, 0, 0}, {0, 0.5, 0}}, 0.0, -2.2, P);
    REQUIRE(classify_trajectory(center, P) == TrajectoryClass::grazing);
    const std::vector<double> eps{1e-2, 1e-3, 1e-4};
    const auto rows = continuity_probe(2.0, center, dir.y, dir.eta, eps, P);

    // Continuity holds: the straddle gap vanishes with eps.
    CHECK(rows[0].d_pair > rows[1].d_pair);
    CHECK(rows[1].d_pair > rows[2].d_pair);
    CHECK(rows[2].d_pair <= 0.05);
    CHECK(rows[0].d_pair >= 0.05);
    // The non-bouncing side stays linear in eps.
    CHECK(rows[2].d_minus <= 2e-3);
    // The bouncing side follows a square-root law, not a linear one.
    double qlo = rows[0].d_pair / std::sqrt(rows[0].eps);
    double qhi = qlo;
    for (const auto& row : rows) {
        const double q = row.d_pair / std::sqrt(row.eps);
        qlo = std::min(qlo, q);
        qhi = std::max(qhi, q);
    }
    CHECK(qhi / qlo <= 2.0);
    CHECK(rows[2].ratio >= 3.0 * rows[0].ratio);
}

TEST_CASE("reverse reflection rule breaks backward continuity") {
    const SimParams P = params_with_h(0.5);
    const PhasePoint peri{{0.6, 0, 0}, {0, 0.5, 0}};
    const PhasePoint center = advance_free(peri, 0.0, -2.2, P);
    const PhasePoint dir = advance_free({{0, 0, 0}, {0, 0.5, 0}}, 0.0, -2.2, P);
    const std::vector<double> eps{1e-2, 1e-3, 1e-4};
    const auto rows = reverse_reflection_probe(2.0, center, dir.y, dir.eta, eps, P);
    for (const auto& row : rows) {
        CHECK(row.d_plus >= 0.1);   // bouncing side jumps to the retraced orbit
        CHECK(row.d_pair >= 0.1);
        CHECK(row.d_minus <= 10.0 * row.eps);  // free side stays linear
    }

    // Control: a never-bouncing center is insensitive to the rule.
    const PhasePoint interior{{0.2, 0.1, 0}, {0.05, 0.1, 0}};
    const auto ctrl = reverse_reflection_probe(2.5, interior, {0.1, 0, 0}, {0.15, 0.1, 0}, eps, P);
    double lo = ctrl[0].ratio, hi = ctrl[0].ratio;
    for (const auto& row : ctrl) {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
    }
    CHECK(hi / lo <= 1.01);
}

TEST_CASE("double backtrack jacobian matches the sine-cube law") {
    const SimParams P1 = params_with_h(1.0);
    const PhasePoint p1{{0.1, 0, 0}, {0.2, 0.1, 0}};
    const double det1 =
        double_backtrack_jacobian(1.5, p1, 1.0, 1.0 - kPi / 6.0, {0.3, -0.2, 0.1}, P1);
    CHECK(std::abs(det1 - std::pow(std::sin(-kPi / 6.0), 3)) <= 1e-9);

    const SimParams P2 = params_with_h(2.0);
    const double det2 =
        double_backtrack_jacobian(0.7, p1, 0.5, 0.5 - kPi / 12.0, {0.1, 0.1, 0}, P2);
    CHECK(std::abs(det2 - std::pow(std::sin(2.0 * (-kPi / 12.0)) / 2.0, 3)) <= 1e-9);

    const SimParams P = params_with_h(0.5);
    CHECK_THROWS_AS(double_backtrack_jacobian(3.0, {{0.3, 0, 0}, {1.2, 0.4, 0}}, 2.9, 0.05,
                                             {2, 0.5, 0}, P),
                    std::domain_error);
    CHECK_THROWS_AS(double_backtrack_jacobian(1.0, p1, 1.2, 0.5, {0.1, 0, 0}, P),
                    std::invalid_argument);
    CHECK_THROWS_AS(double_backtrack_jacobian(1.0, p1, 0.5, 0.5, {0.1, 0, 0}, P),
                    std::invalid_argument);

    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        // Small positions and speeds keep both legs interior-class, so no
        // bounce can interrupt the differentiated leg.
        const Vec3 y = random_in_ball(gen, 0.5);
        const Vec3 eta = random_in_ball(gen, 0.15);
        const Vec3 ep = random_in_ball(gen, 0.15);
        const double tau = 0.5 + 2.5 * u(gen);
        const double tau1 = (0.2 + 0.7 * u(gen)) * tau;
        const double tau2 = std::max(0.0, tau1 - (0.05 + 0.9 * u(gen) * tau1));
        if (tau1 - tau2 < 0.05) continue;
        const double det = double_backtrack_jacobian(tau, {y, eta}, tau1, tau2, ep, P);
        const double expected = std::pow(std::sin(P.h * (tau2 - tau1)) / P.h, 3);
        CHECK(std::abs(det - expected) <= 1e-6 * std::abs(expected));
    }
}
