/// @file trajectories.hpp
/// @brief Exact characteristics of the fixed-frame transport operator
///        d/dtau + eta . grad_y - h^2 y . grad_eta in the unit ball with
///        specular reflection.
///
/// Free flight solves a harmonic oscillator, so every segment is a closed
/// form: Y = y0 cos(h dt) + (eta0/h) sin(h dt). Two quantities are conserved
/// along segments and across specular bounces: the energy e = |eta|^2 +
/// h^2 |y|^2 and the squared angular momentum m = |eta x y|^2. The orbit is
/// an ellipse with semi-axes l_max >= l_min; it meets the unit sphere iff
/// e - m > h^2 (crossing), touches it tangentially iff e - m = h^2
/// (grazing), and stays strictly inside iff e - m < h^2.
///
/// Exit times come from the phase of |Y(s)|^2 = A + D cos(2hs - theta),
/// never from event stepping: root finding is relegated to test oracles.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "kinetics/params.hpp"
#include "kinetics/vec3.hpp"

namespace kinetics {

struct PhasePoint {
    Vec3 y;    ///< position in the closed unit ball
    Vec3 eta;  ///< velocity
};

struct TrajectoryInvariants {
    double e = 0.0;      ///< |eta|^2 + h^2 |y|^2
    double m = 0.0;      ///< |eta x y|^2
    double l_max = 0.0;  ///< major semi-axis of the orbit ellipse
    double l_min = 0.0;  ///< minor semi-axis
};

enum class TrajectoryClass { crossing, grazing, interior };

enum class BoundaryClass { gamma_plus, gamma_minus, gamma_00, gamma_01, interior };

/// Reflection law applied at boundary contacts. The reverse rule eta -> -eta
/// exists only to demonstrate that backward trajectories lose continuity
/// under it; everything physical uses specular.
enum class ReflectionRule { specular, reverse };

/// Free harmonic flight from (p at tau0) to tau; exact for any dt = tau-tau0
/// of either sign. Pure whole-space flow, no boundary handling.
PhasePoint advance_free(const PhasePoint& p, double tau0, double tau, const SimParams& params);

TrajectoryInvariants invariants(const PhasePoint& p, const SimParams& params);

/// Orbit classification by the sign of e - m - h^2 (tolerance 1e-12).
TrajectoryClass classify_trajectory(const PhasePoint& p, const SimParams& params);

/// Phase-boundary classification for points with |y| = 1: outgoing
/// (gamma_plus), incoming (gamma_minus), or tangential, the latter split
/// into the non-singular part |eta| < h (orbits curve back inside) and the
/// singular part |eta| >= h. Points with |y| < 1 report interior.
BoundaryClass classify_boundary(const PhasePoint& p, const SimParams& params);

/// Specular reflection at the unit-sphere point y: eta - 2 (eta.y) y.
/// Rejects y off the boundary beyond 1e-9.
Vec3 reflect_specular(const Vec3& y, const Vec3& eta);

struct BackwardExit {
    double tau_b = 0.0;  ///< elapsed backward time to the first boundary hit
    Vec3 y_b;            ///< exit position, |y_b| = 1
    Vec3 eta_b;          ///< velocity there (points inward: y_b . eta_b < 0)
};

/// First backward boundary contact of a crossing-class point. A start on
/// the incoming boundary (|y| = 1, y.eta < 0) is reflected first, per the
/// backward-trace convention, so its tau_b is the full chord time.
/// Throws on interior or grazing starts.
BackwardExit backward_exit(const PhasePoint& p, double tau0, const SimParams& params);

struct BounceEvent {
    double tau = 0.0;      ///< contact time
    Vec3 y;                ///< contact point, |y| = 1
    Vec3 eta_pre;          ///< velocity on the later (already traced) segment
    Vec3 eta;              ///< post-reflection velocity used further backward
    bool grazing_contact = false;  ///< tangency: velocity left unchanged
};

class BackwardPath {
  public:
    /// Trace backward from (tau0, p) to tau = 0, collecting bounce events in
    /// strictly decreasing time order. Grazing-class starts trace the free
    /// orbit (a tangential touch changes nothing). Starts on the singular
    /// tangential set (|y| = 1, y.eta = 0, |eta| >= h) are rejected.
    BackwardPath(double tau0, const PhasePoint& p, const SimParams& params,
                 std::size_t max_bounces = 1000000,
                 ReflectionRule rule = ReflectionRule::specular);

    double tau0() const { return tau0_; }
    const PhasePoint& origin() const { return origin_; }
    TrajectoryClass trajectory_class() const { return cls_; }
    const std::vector<BounceEvent>& events() const { return events_; }

    /// Inter-bounce chord time arccos(c1)/h of the orbit (crossing class
    /// only; zero otherwise). Identical between all bounce pairs because e
    /// and m survive reflection.
    double chord_gap() const { return chord_gap_; }

    /// State at any tau in [0, tau0]: exact free flight from the segment
    /// anchor. At an event time the post-reflection state is returned.
    PhasePoint at(double tau) const;

    /// One line per event: tau y[3] eta[3] (post-reflection velocity).
    void dump(std::ostream& os) const;

  private:
    double tau0_;
    PhasePoint origin_;
    TrajectoryClass cls_;
    std::vector<BounceEvent> events_;
    double chord_gap_ = 0.0;
    SimParams params_;
};

struct ASetParams {
    double kappa = 0.1;  ///< grazing margin: e - m >= h^2 + kappa^2
    double N = 2.0;      ///< velocity window: 2h <= |eta| <= 2N
    double delta = 0.0;  ///< bounce-time exclusion half-width h^2 kappa / N^2

    static ASetParams make(double kappa, double N, const SimParams& params);
};

/// Membership in the uniformly non-grazing set A(kappa, N).
bool in_a_set(const PhasePoint& p, const ASetParams& aset, const SimParams& params);

/// Quantitative certification of the bounce-structure bounds on an A-set
/// point: (a) chord gap within [kappa/(2N^2), pi/(2h)], (b) bounce count at
/// most pi N^2 / (h kappa), (c) at times more than delta away from every
/// bounce, (y(tau), eta') stays uniformly non-grazing with margin
/// h^4 kappa^2 / N^2 for every sampled eta' in the shell 2h <= |eta'| <= 2N,
/// (d) total excluded time 2 delta x count at most 2 pi h.
struct VelocityLemmaReport {
    double delta_tau = 0.0;
    std::size_t bounce_count = 0;
    std::size_t windows_checked = 0;
    double min_window_margin = 0.0;  ///< min over samples of e' - m' - h^2
    double excluded_measure = 0.0;
    bool gap_lower_ok = false;
    bool gap_upper_ok = false;
    bool count_ok = false;
    bool window_ok = false;
    bool measure_ok = false;
    bool pass = false;
    std::string failure;  ///< first failed clause, empty when pass
};

VelocityLemmaReport velocity_lemma_report(double tau0, const PhasePoint& p,
                                          const ASetParams& aset, const SimParams& params);

/// One row per probe size: sup distances over matched times between the
/// backward paths of center, center + eps dir, and center - eps dir.
struct ContinuityModuli {
    double eps = 0.0;
    double d_plus = 0.0;   ///< sup |y_center - y_plus|
    double d_minus = 0.0;  ///< sup |y_center - y_minus|
    double d_pair = 0.0;   ///< sup |y_plus - y_minus|
    double ratio = 0.0;    ///< max of the three distances over eps
};

/// Path-continuity moduli under specular reflection. dir = (dy, deta) is the
/// phase-space perturbation direction; sampled at 400 matched times.
std::vector<ContinuityModuli> continuity_probe(double tau0, const PhasePoint& center,
                                               const Vec3& dy, const Vec3& deta,
                                               const std::vector<double>& eps_list,
                                               const SimParams& params);

/// Same probe with the reverse-reflection rule eta -> -eta. For a pair that
/// straddles a boundary contact the pair distance stays order one as eps
/// shrinks: the backward flow is genuinely discontinuous under this rule.
std::vector<ContinuityModuli> reverse_reflection_probe(double tau0, const PhasePoint& center,
                                                       const Vec3& dy, const Vec3& deta,
                                                       const std::vector<double>& eps_list,
                                                       const SimParams& params);

/// Finite-difference determinant of the two-leg backtrack map: follow the
/// path of (tau, p) back to tau1, restart there with velocity eta_prime,
/// and differentiate the position at tau2 < tau1 with respect to eta_prime.
/// The exact value is (sin(h (tau2 - tau1)) / h)^3 as long as no bounce
/// interrupts the second leg; a bounce in (tau2, tau1) raises domain_error.
double double_backtrack_jacobian(double tau, const PhasePoint& p, double tau1, double tau2,
                                 const Vec3& eta_prime, const SimParams& params);

}  // namespace kinetics
