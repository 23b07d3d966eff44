#pragma once

#include <optional>
#include <vector>

#include "plisskit/cocycle.hpp"
#include "plisskit/maps.hpp"

namespace plisskit::cp {

using cocycle::DirectionPair;
using cocycle::LyapunovEstimate;
using maps::MapBounds;
using maps::MapDescriptor;
using maps::TorusPoint;
using maps::Vec2;

// Slack for all log-space membership comparisons. The cat map sits exactly
// on the lower bounds sigma_t1^n = alpha^n and rho_t1^n, so the comparisons
// must be inclusive up to accumulated rounding.
inline constexpr double kCompareSlack = 1e-9;

struct SchedulerInput {
    double t = 0.0;
    std::optional<double> s;  // empty = auto (interval midpoint)
    MapBounds bounds;
    int N = 1;
};

// Output of the explicit constant schedule:
//   delta_t  = t * max(-log alpha, log beta)
//   s        in (3/(4t), (5t-4)/t), midpoint when auto
//   sigma    = exp(-s delta_t), rho = exp(-2 s delta_t)
//   sigma_t1 = alpha, sigma_t2 = 1/beta, rho_t1 = rho_t2 = alpha/beta
//   eta      = 1 - (1/sigma - sigma)^2 / (2 beta^2)
struct CPConstants {
    double t = 0.0;
    double s = 0.0;
    double s_lo = 0.0, s_hi = 0.0;  // admissible open interval for s
    double delta_t = 0.0;
    double sigma = 0.0, rho = 0.0;
    double sigma_t1 = 0.0, sigma_t2 = 0.0;
    double rho_t1 = 0.0, rho_t2 = 0.0;
    double eta = 0.0;
    double alpha = 0.0, beta = 0.0;  // bounds the schedule was built from
    int N = 1;
};

// Throws TTooSmall when t <= 19/20 (empty s-interval), SchedulerError when
// t >= 1, SOutOfRange for an explicit s outside the open interval, and
// SideConditionViolated if sigma_ti*rho_ti/(sigma*rho) > sigma fails.
CPConstants schedule_constants(const SchedulerInput& in);

// min(lambda_u, -lambda_s) > (19/20) * r_estimate.
// Throws NotConverged when lambda.residual >= 1e-3.
bool check_hypothesis(const LyapunovEstimate& lambda, const MapBounds& bounds);

struct DeltaFlags {
    bool d1 = false, d2 = false, d3 = false, d4 = false, d5 = false;
    int horizon = 0;
    bool all() const { return d1 && d2 && d3 && d4 && d5; }
};

// Finite-horizon membership flags at p for n = 1..H, log-space with slack:
//   d1:  n log sigma_t1 <= log ||d f^n|_E||             <= n log sigma
//   d2:  n log rho_t1   <= log (||d f^n|_E||^2/|det|)   <= n log rho
//   d3:  n log sigma_t2 <= log ||d f^-n|_F||            <= n log sigma
//   d4:  n log rho_t2   <= log (||d f^-n|_F||^2/|det|)  <= n log rho
//   d5:  |cos angle(E, F)| <= eta
// The n-step norms factor through the stable/unstable line bundles, so they
// are accumulated as sums of one-step logs along per-point direction
// estimates (re-estimated from a fresh window at every orbit point; pushing
// one fixed vector forward is exponentially unstable and would corrupt the
// sums long before n = H). The supplied pair `dirs` replaces the estimate at
// p itself: step 0 of d1/d2 runs along dirs.E, step 0 of d3/d4 along dirs.F,
// and d5 uses dirs.cos_angle.
DeltaFlags check_membership(const MapDescriptor& map, TorusPoint p,
                            const DirectionPair& dirs, const CPConstants& consts,
                            int H, int window = 40);

// Angle claim at a point x with x in Delta1 and f(x) in Delta3:
// |cos angle(E, F)| <= eta + slack. Throws PreconditionNotMet unless
// at_x.d1 and at_fx.d3.
bool angle_bound_check(const CPConstants& consts, const DeltaFlags& at_x,
                       const DeltaFlags& at_fx, const DirectionPair& dirs);

// ---------------------------------------------------------------------------
// Orbit bundle: per-point direction estimates and one-step log data along an
// orbit segment, shared by check_membership and the experiment scans so both
// evaluate the exact same arithmetic.
//
// Index convention: j runs over [j_lo, j_hi] (j may be negative; the orbit is
// extended through the inverse map), array slot = j - j_lo.
// ---------------------------------------------------------------------------
struct OrbitBundle {
    long j_lo = 0, j_hi = -1;
    int window = 0;
    std::vector<TorusPoint> points;
    std::vector<Vec2> dir_e, dir_f;     // per-point window estimates
    std::vector<char> valid;            // both windows non-degenerate
    std::vector<double> a_fwd;          // log ||J_j e_j||
    std::vector<double> a_bwd;          // log ||Jinv_j f_j||   (step to j-1)
    std::vector<double> det_fwd;        // log |det J_j|
    std::vector<double> det_bwd;        // log |det Jinv_j|
    std::vector<double> cosang;         // |<e_j, f_j>|
    // Prefix sums from j_lo: S[i+1] = S[i] + value[i].
    std::vector<double> s_a_fwd, s_q_fwd;  // q = 2a - logdet
    std::vector<double> s_a_bwd, s_q_bwd;
    std::vector<long> invalid_prefix;

    long slot(long j) const { return j - j_lo; }
    bool contains(long j) const { return j >= j_lo && j <= j_hi; }
};

// Builds per-point data for j in [j_lo, j_hi] around base = orbit index 0.
// Needs the orbit on [j_lo - window, j_hi + window].
OrbitBundle build_orbit_bundle(const MapDescriptor& map, TorusPoint base,
                               long j_lo, long j_hi, int window);

// Membership flags at orbit index k of a bundle; requires
// [k - H + 1, k + H - 1] within the bundle range.
DeltaFlags flags_at(const OrbitBundle& bundle, long k, const CPConstants& consts, int H);

}  // namespace plisskit::cp
