#include "plisskit/cp.hpp"

#include <cmath>
#include <sstream>

#include "plisskit/errors.hpp"

namespace plisskit::cp {

using maps::Direction;
using maps::Mat2;

CPConstants schedule_constants(const SchedulerInput& in) {
    const double t = in.t;
    if (t <= 19.0 / 20.0) throw TTooSmall("t must exceed 19/20");
    if (t >= 1.0) throw SchedulerError("t must be less than 1");
    if (!(in.bounds.alpha > 0.0 && in.bounds.beta > 0.0))
        throw PreconditionNotMet("bounds must have positive alpha and beta");
    if (in.N < 1) throw PreconditionNotMet("N must be >= 1");

    CPConstants c;
    c.t = t;
    c.N = in.N;
    c.alpha = in.bounds.alpha;
    c.beta = in.bounds.beta;
    c.s_lo = 3.0 / (4.0 * t);
    c.s_hi = (5.0 * t - 4.0) / t;

    double r = std::max(-std::log(c.alpha), std::log(c.beta));
    if (!(r > 0.0)) throw PreconditionNotMet("max(-log alpha, log beta) must be positive");
    c.delta_t = t * r;

    if (in.s.has_value()) {
        c.s = *in.s;
        if (!(c.s > c.s_lo && c.s < c.s_hi)) {
            std::ostringstream msg;
            msg << "s = " << c.s << " outside (" << c.s_lo << ", " << c.s_hi << ")";
            throw SOutOfRange(msg.str());
        }
    } else {
        c.s = 0.5 * (c.s_lo + c.s_hi);
    }

    c.sigma = std::exp(-c.s * c.delta_t);
    c.rho = std::exp(-2.0 * c.s * c.delta_t);
    c.sigma_t1 = c.alpha;
    c.sigma_t2 = 1.0 / c.beta;
    c.rho_t1 = c.alpha / c.beta;
    c.rho_t2 = c.rho_t1;
    c.eta = 1.0 - (1.0 / c.sigma - c.sigma) * (1.0 / c.sigma - c.sigma) /
                      (2.0 * c.beta * c.beta);

    // Side condition; holds automatically for s > 3/(4t) but is re-checked
    // on every output.
    double denom = c.sigma * c.rho;
    if (!(c.sigma_t1 * c.rho_t1 / denom > c.sigma) ||
        !(c.sigma_t2 * c.rho_t2 / denom > c.sigma))
        throw SideConditionViolated("sigma_ti*rho_ti/(sigma*rho) > sigma failed");
    return c;
}

bool check_hypothesis(const LyapunovEstimate& lambda, const MapBounds& bounds) {
    if (!(lambda.residual < 1e-3))
        throw NotConverged("FTLE residual >= 1e-3; lengthen the run");
    return std::min(lambda.lambda_u, -lambda.lambda_s) > (19.0 / 20.0) * bounds.r_estimate;
}

OrbitBundle build_orbit_bundle(const MapDescriptor& map, TorusPoint base,
                               long j_lo, long j_hi, int window) {
    maps::validate(map);
    if (j_lo > j_hi) throw PreconditionNotMet("empty bundle range");
    if (window < 1) throw PreconditionNotMet("window must be >= 1");

    OrbitBundle b;
    b.j_lo = j_lo;
    b.j_hi = j_hi;
    b.window = window;

    // Orbit points and per-point Jacobians on the extended range
    // [j_lo - window, j_hi + window]; the extension uses the exact inverse.
    const long p_lo = j_lo - window;
    const long p_hi = j_hi + window;
    const long np = p_hi - p_lo + 1;
    std::vector<TorusPoint> pts(np);
    pts[0 - p_lo] = base;
    {
        TorusPoint q = base;
        for (long j = 1; j <= p_hi; ++j) {
            q = maps::apply(map, q, Direction::Forward);
            pts[j - p_lo] = q;
        }
        q = base;
        for (long j = -1; j >= p_lo; --j) {
            q = maps::apply(map, q, Direction::Backward);
            pts[j - p_lo] = q;
        }
    }
    std::vector<Mat2> jf(np), jb(np);
    for (long i = 0; i < np; ++i) {
        jf[i] = maps::jacobian(map, pts[i], Direction::Forward);
        jb[i] = maps::jacobian(map, pts[i], Direction::Backward);
    }

    const long n = j_hi - j_lo + 1;
    b.points.resize(n);
    b.dir_e.resize(n);
    b.dir_f.resize(n);
    b.valid.assign(n, 0);
    b.a_fwd.assign(n, 0.0);
    b.a_bwd.assign(n, 0.0);
    b.det_fwd.assign(n, 0.0);
    b.det_bwd.assign(n, 0.0);
    b.cosang.assign(n, 2.0);  // sentinel: invalid entries can never pass d5

    std::vector<Mat2> win(window);
    for (long j = j_lo; j <= j_hi; ++j) {
        const long i = j - j_lo;
        b.points[i] = pts[j - p_lo];

        // Forward window at j: factors J_j, ..., J_{j+window-1}.
        for (int k = 0; k < window; ++k) win[k] = jf[j + k - p_lo];
        cocycle::WindowEstimate we = cocycle::analyze_window(win);
        // Backward window at j: factors Jinv_j, Jinv_{j-1}, ...
        for (int k = 0; k < window; ++k) win[k] = jb[j - k - p_lo];
        cocycle::WindowEstimate wb = cocycle::analyze_window(win);

        if (we.degenerate || wb.degenerate) continue;
        b.valid[i] = 1;
        b.dir_e[i] = we.contracted;
        b.dir_f[i] = wb.contracted;
        b.a_fwd[i] = std::log((jf[j - p_lo] * we.contracted).norm());
        b.a_bwd[i] = std::log((jb[j - p_lo] * wb.contracted).norm());
        b.det_fwd[i] = std::log(std::fabs(jf[j - p_lo].det()));
        b.det_bwd[i] = std::log(std::fabs(jb[j - p_lo].det()));
        b.cosang[i] = std::min(1.0, std::fabs(we.contracted.dot(wb.contracted)));
    }

    b.s_a_fwd.assign(n + 1, 0.0);
    b.s_q_fwd.assign(n + 1, 0.0);
    b.s_a_bwd.assign(n + 1, 0.0);
    b.s_q_bwd.assign(n + 1, 0.0);
    b.invalid_prefix.assign(n + 1, 0);
    for (long i = 0; i < n; ++i) {
        b.s_a_fwd[i + 1] = b.s_a_fwd[i] + b.a_fwd[i];
        b.s_q_fwd[i + 1] = b.s_q_fwd[i] + (2.0 * b.a_fwd[i] - b.det_fwd[i]);
        b.s_a_bwd[i + 1] = b.s_a_bwd[i] + b.a_bwd[i];
        b.s_q_bwd[i + 1] = b.s_q_bwd[i] + (2.0 * b.a_bwd[i] - b.det_bwd[i]);
        b.invalid_prefix[i + 1] = b.invalid_prefix[i] + (b.valid[i] ? 0 : 1);
    }
    return b;
}

namespace {

// Two-sided horizon check: for every n = 1..H,
//   n*lo - slack <= S(i0 + dir*n) - S(i0) (accumulated in the given
//   direction) <= n*hi + slack.
bool horizon_ok_fwd(const std::vector<double>& S, long i0, int H, double lo, double hi) {
    double base = S[i0];
    for (int n = 1; n <= H; ++n) {
        double v = S[i0 + n] - base;
        double dn = n;
        if (v < dn * lo - kCompareSlack || v > dn * hi + kCompareSlack) return false;
    }
    return true;
}

bool horizon_ok_bwd(const std::vector<double>& S, long i0, int H, double lo, double hi) {
    // Sums over {i0, i0-1, ..., i0-n+1} = S[i0+1] - S[i0+1-n].
    double base = S[i0 + 1];
    for (int n = 1; n <= H; ++n) {
        double v = base - S[i0 + 1 - n];
        double dn = n;
        if (v < dn * lo - kCompareSlack || v > dn * hi + kCompareSlack) return false;
    }
    return true;
}

}  // namespace

DeltaFlags flags_at(const OrbitBundle& b, long k, const CPConstants& c, int H) {
    if (H < 1) throw PreconditionNotMet("horizon must be >= 1");
    if (!b.contains(k - H + 1) || !b.contains(k + H - 1))
        throw PreconditionNotMet("bundle range too small for this horizon");

    DeltaFlags f;
    f.horizon = H;
    const long i = b.slot(k);

    const double log_sigma = std::log(c.sigma);
    const double log_rho = std::log(c.rho);

    // Invalid direction estimates anywhere in the lookahead/lookbehind leave
    // the corresponding sums meaningless; the flags stay false.
    bool fwd_valid = b.invalid_prefix[i + H] - b.invalid_prefix[i] == 0;
    bool bwd_valid = b.invalid_prefix[i + 1] - b.invalid_prefix[i + 1 - H] == 0;

    if (fwd_valid) {
        f.d1 = horizon_ok_fwd(b.s_a_fwd, i, H, std::log(c.sigma_t1), log_sigma);
        f.d2 = horizon_ok_fwd(b.s_q_fwd, i, H, std::log(c.rho_t1), log_rho);
    }
    if (bwd_valid) {
        f.d3 = horizon_ok_bwd(b.s_a_bwd, i, H, std::log(c.sigma_t2), log_sigma);
        f.d4 = horizon_ok_bwd(b.s_q_bwd, i, H, std::log(c.rho_t2), log_rho);
    }
    if (b.valid[i]) f.d5 = b.cosang[i] <= c.eta + kCompareSlack;
    return f;
}

DeltaFlags check_membership(const MapDescriptor& map, TorusPoint p,
                            const DirectionPair& dirs, const CPConstants& consts,
                            int H, int window) {
    if (H < 1) throw PreconditionNotMet("horizon must be >= 1");
    OrbitBundle b = build_orbit_bundle(map, p, -(H + 1), H + 1, window);

    // The caller-supplied pair overrides the estimate at p itself: the first
    // step of d1/d2 runs along dirs.E, of d3/d4 along dirs.F, and d5 uses
    // dirs.cos_angle.
    const long i = b.slot(0);
    Mat2 jf = maps::jacobian(map, p, Direction::Forward);
    Mat2 jb = maps::jacobian(map, p, Direction::Backward);
    b.dir_e[i] = dirs.E;
    b.dir_f[i] = dirs.F;
    b.valid[i] = 1;
    b.a_fwd[i] = std::log((jf * dirs.E.normalized()).norm());
    b.a_bwd[i] = std::log((jb * dirs.F.normalized()).norm());
    b.cosang[i] = std::min(1.0, std::fabs(dirs.cos_angle));
    // Rebuild the prefix data touched by the override.
    const long n = b.j_hi - b.j_lo + 1;
    for (long m = i; m < n; ++m) {
        b.s_a_fwd[m + 1] = b.s_a_fwd[m] + b.a_fwd[m];
        b.s_q_fwd[m + 1] = b.s_q_fwd[m] + (2.0 * b.a_fwd[m] - b.det_fwd[m]);
        b.s_a_bwd[m + 1] = b.s_a_bwd[m] + b.a_bwd[m];
        b.s_q_bwd[m + 1] = b.s_q_bwd[m] + (2.0 * b.a_bwd[m] - b.det_bwd[m]);
        b.invalid_prefix[m + 1] = b.invalid_prefix[m] + (b.valid[m] ? 0 : 1);
    }
    return flags_at(b, 0, consts, H);
}

bool angle_bound_check(const CPConstants& consts, const DeltaFlags& at_x,
                       const DeltaFlags& at_fx, const DirectionPair& dirs) {
    if (!at_x.d1 || !at_fx.d3)
        throw PreconditionNotMet("angle claim needs x in Delta1 and f(x) in Delta3");
    return std::fabs(dirs.cos_angle) <= consts.eta + kCompareSlack;
}

}  // namespace plisskit::cp
