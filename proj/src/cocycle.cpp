#include "plisskit/cocycle.hpp"

#include <algorithm>
#include <cmath>

#include "plisskit/errors.hpp"

namespace plisskit::cocycle {

namespace {

// QR factorization of a 2x2 matrix with R11 > 0, R22 > 0 (column flips
// absorbed into Q). Assumes B is nonsingular.
struct QR {
    Mat2 Q;
    double r11, r12, r22;
};

QR qr2(const Mat2& B) {
    double r11 = std::hypot(B.a, B.c);
    if (r11 == 0.0) throw DegenerateSplitting("singular matrix in QR step");
    double cs = B.a / r11;
    double sn = B.c / r11;
    double r12 = cs * B.b + sn * B.d;
    double r22 = -sn * B.b + cs * B.d;
    Mat2 Q{cs, -sn, sn, cs};
    if (r22 < 0.0) {
        r22 = -r22;
        Q.b = -Q.b;
        Q.d = -Q.d;
    }
    return {Q, r11, r12, r22};
}

// Deterministic sign: make the dominant coordinate positive.
Vec2 normalize_sign(Vec2 v) {
    bool flip = std::fabs(v.x) > std::fabs(v.y) ? v.x < 0.0 : v.y < 0.0;
    return flip ? Vec2{-v.x, -v.y} : v;
}

// Dominant eigenvector of the symmetric matrix [[p, q], [q, r]].
Vec2 dominant_eigvec(double p, double q, double r) {
    if (q == 0.0) return p >= r ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
    double half = 0.5 * (p - r);
    double l1 = 0.5 * (p + r) + std::hypot(half, q);
    // Two algebraically equivalent forms; take the better-conditioned one.
    Vec2 v1{q, l1 - p};
    Vec2 v2{l1 - r, q};
    Vec2 v = v1.norm() >= v2.norm() ? v1 : v2;
    return v.normalized();
}

}  // namespace

CocycleTrace compute_trace(const MapDescriptor& map, TorusPoint p, Vec2 v,
                           long n, Direction dir) {
    maps::validate(map);
    if (n < 0) throw PreconditionNotMet("trace length must be >= 0");
    double vn = v.norm();
    if (!(vn > 0.0)) throw PreconditionNotMet("tracked vector must be nonzero");

    CocycleTrace tr;
    tr.base = p;
    tr.length = n;
    tr.direction = dir;
    tr.log_norm_e.reserve(n);
    tr.log_r_bot.reserve(n);
    tr.frames.reserve(n);

    Vec2 u = {v.x / vn, v.y / vn};
    Mat2 Q{u.x, -u.y, u.y, u.x};  // orthonormal frame with first column u
    for (long k = 0; k < n; ++k) {
        Mat2 J = maps::jacobian(map, p, dir);
        QR f = qr2(J * Q);
        Q = f.Q;
        tr.log_norm_e.push_back(std::log(f.r11));
        tr.log_r_bot.push_back(std::log(f.r22));
        tr.frames.push_back(Q);
        p = maps::apply(map, p, dir);
    }
    return tr;
}

LyapunovEstimate ftle(const MapDescriptor& map, TorusPoint p, long n) {
    maps::validate(map);
    if (n < 2) throw PreconditionNotMet("ftle needs n >= 2");

    Mat2 Q = Mat2::identity();
    // Unrecorded warmup: align the frame with the flag so the measured
    // averages carry no O(log|<q0,e_u>|/n) transient.
    for (int k = 0; k < kFrameWarmup; ++k) {
        QR f = qr2(maps::jacobian(map, p, Direction::Forward) * Q);
        Q = f.Q;
        p = maps::apply(map, p, Direction::Forward);
    }

    long n1 = n / 2;
    double s_top[2] = {0.0, 0.0}, s_bot[2] = {0.0, 0.0};
    for (long k = 0; k < n; ++k) {
        QR f = qr2(maps::jacobian(map, p, Direction::Forward) * Q);
        Q = f.Q;
        int half = k < n1 ? 0 : 1;
        s_top[half] += std::log(f.r11);
        s_bot[half] += std::log(f.r22);
        p = maps::apply(map, p, Direction::Forward);
    }

    LyapunovEstimate est;
    est.n = n;
    est.lambda_u = (s_top[0] + s_top[1]) / n;
    est.lambda_s = (s_bot[0] + s_bot[1]) / n;
    double lu0 = s_top[0] / n1, lu1 = s_top[1] / (n - n1);
    double ls0 = s_bot[0] / n1, ls1 = s_bot[1] / (n - n1);
    est.residual = std::max(std::fabs(lu0 - lu1), std::fabs(ls0 - ls1));
    return est;
}

WindowEstimate analyze_window(std::span<const Mat2> factors) {
    if (factors.empty()) throw PreconditionNotMet("empty window");
    // Accumulate the upper-triangular R-product of the QR cocycle started at
    // Q0 = I: P = Q_w * (R_w ... R_1), so the right singular directions of P
    // are those of the accumulated R-product, and the product diagonal gives
    // the Benettin growth surrogates. Rescale each step to keep entries O(1).
    Mat2 Q = Mat2::identity();
    double r00 = 1.0, r01 = 0.0, r11 = 1.0;
    double log_top = 0.0, log_bot = 0.0;
    for (const Mat2& J : factors) {
        QR f = qr2(J * Q);
        Q = f.Q;
        // R_k * [previous triangular product]
        double n00 = f.r11 * r00;
        double n01 = f.r11 * r01 + f.r12 * r11;
        double n11 = f.r22 * r11;
        log_top += std::log(f.r11);
        log_bot += std::log(f.r22);
        double scale = std::max({std::fabs(n00), std::fabs(n01), std::fabs(n11)});
        r00 = n00 / scale;
        r01 = n01 / scale;
        r11 = n11 / scale;
    }

    WindowEstimate out;
    out.log_growth_top = log_top;
    out.log_growth_bot = log_bot;
    out.degenerate = std::fabs(log_top - log_bot) < std::log1p(1e-6);

    // Right singular directions of the scaled triangular product via R^T R.
    double p = r00 * r00;
    double q = r00 * r01;
    double r = r01 * r01 + r11 * r11;
    Vec2 expanded = dominant_eigvec(p, q, r);
    out.contracted = normalize_sign(expanded.perp());
    return out;
}

DirectionPair oseledets_directions(const MapDescriptor& map, TorusPoint p, int window) {
    maps::validate(map);
    if (window < 1) throw PreconditionNotMet("window must be >= 1");

    std::vector<Mat2> fwd, bwd;
    fwd.reserve(window);
    bwd.reserve(window);
    TorusPoint q = p;
    for (int k = 0; k < window; ++k) {
        fwd.push_back(maps::jacobian(map, q, Direction::Forward));
        q = maps::apply(map, q, Direction::Forward);
    }
    q = p;
    for (int k = 0; k < window; ++k) {
        bwd.push_back(maps::jacobian(map, q, Direction::Backward));
        q = maps::apply(map, q, Direction::Backward);
    }

    WindowEstimate we = analyze_window(fwd);
    WindowEstimate wb = analyze_window(bwd);
    if (we.degenerate || wb.degenerate)
        throw DegenerateSplitting("no hyperbolicity visible at this window");

    DirectionPair dirs;
    dirs.E = we.contracted;
    dirs.F = wb.contracted;
    dirs.cos_angle = std::min(1.0, std::fabs(dirs.E.dot(dirs.F)));
    return dirs;
}

std::vector<double> step_log_norms(const MapDescriptor& map, TorusPoint p, Vec2 v,
                                   long n, Direction dir) {
    maps::validate(map);
    if (n < 0) throw PreconditionNotMet("n must be >= 0");
    double vn = v.norm();
    if (!(vn > 0.0)) throw PreconditionNotMet("direction must be nonzero");

    std::vector<double> out;
    out.reserve(n);
    Vec2 u{v.x / vn, v.y / vn};
    for (long k = 0; k < n; ++k) {
        Vec2 w = maps::jacobian(map, p, dir) * u;
        double wn = w.norm();
        out.push_back(std::log(wn));
        u = {w.x / wn, w.y / wn};
        p = maps::apply(map, p, dir);
    }
    return out;
}

std::vector<double> log_det_sequence(const MapDescriptor& map, TorusPoint p,
                                     long n, Direction dir) {
    maps::validate(map);
    if (n < 0) throw PreconditionNotMet("n must be >= 0");
    std::vector<double> out;
    out.reserve(n);
    for (long k = 0; k < n; ++k) {
        double dt = maps::jacobian(map, p, dir).det();
        if (std::fabs(dt) <= 1e-12)
            throw DegenerateSplitting("Jacobian determinant vanished");
        out.push_back(std::log(std::fabs(dt)));
        p = maps::apply(map, p, dir);
    }
    return out;
}

}  // namespace plisskit::cocycle
