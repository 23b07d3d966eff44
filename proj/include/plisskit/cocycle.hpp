#pragma once

#include <span>
#include <vector>

#include "plisskit/maps.hpp"

namespace plisskit::cocycle {

using maps::Direction;
using maps::MapDescriptor;
using maps::Mat2;
using maps::TorusPoint;
using maps::Vec2;

// Number of unrecorded QR steps used to align the orthonormal frame with the
// Oseledets flag before exponents are measured. Without it the finite-time
// average carries a log|<q0, e_u>|/n transient that is visible at n = 1e5.
inline constexpr int kFrameWarmup = 64;

// Per-step record of a QR-reorthonormalized cocycle product along an orbit.
// The tracked vector v is the first frame column, so log_norm_e[k] equals the
// top QR scale factor and cumulative sums reproduce log ||d f^(kN) v||
// without ever forming the product matrix.
struct CocycleTrace {
    TorusPoint base;
    long length = 0;
    Direction direction = Direction::Forward;
    std::vector<double> log_norm_e;   // log R11 per step = log growth of v
    std::vector<double> log_r_bot;    // log |R22| per step
    std::vector<Mat2> frames;         // orthonormal frame after each step
};

CocycleTrace compute_trace(const MapDescriptor& map, TorusPoint p, Vec2 v,
                           long n, Direction dir = Direction::Forward);

struct LyapunovEstimate {
    double lambda_u = 0.0;
    double lambda_s = 0.0;
    long n = 0;
    // Max coordinate difference between the estimates over the first and
    // second halves of the measured window.
    double residual = 0.0;
};

// Finite-time Lyapunov exponents over n steps (after kFrameWarmup alignment
// steps that are not counted).
LyapunovEstimate ftle(const MapDescriptor& map, TorusPoint p, long n);

// Unit directions with deterministic sign, |cos angle| in [0, 1].
struct DirectionPair {
    Vec2 E;  // most-contracted right singular direction, forward window
    Vec2 F;  // most-contracted right singular direction, backward window
    double cos_angle = 0.0;
};

// Window analysis of a matrix product P = M_{w-1} ... M_0 given the factors
// in application order. Never forms P at full scale: accumulates the QR
// R-product with per-step rescaling. `contracted` is the most-contracted
// right singular direction of P; log_growth_top/bot are the accumulated logs
// of the QR diagonal (the Benettin growth surrogates). The window is flagged
// degenerate when the two growth factors differ by less than 1 + 1e-6 --
// that is what separates parabolic shear behaviour from hyperbolic growth at
// practical window lengths.
struct WindowEstimate {
    Vec2 contracted;
    double log_growth_top = 0.0;
    double log_growth_bot = 0.0;
    bool degenerate = false;
};

WindowEstimate analyze_window(std::span<const Mat2> factors);

// E from the forward window at p, F from the backward window at p.
// Throws DegenerateSplitting when either window is degenerate.
DirectionPair oseledets_directions(const MapDescriptor& map, TorusPoint p, int window);

// Logs of one-step norms along the normalized transport of v:
//   u_0 = v/|v|, u_{k+1} = J_k u_k / ||J_k u_k||,  out[k] = log ||J_k u_k||.
std::vector<double> step_log_norms(const MapDescriptor& map, TorusPoint p, Vec2 v,
                                   long n, Direction dir);

// out[k] = log |det d_{f^(+-kN)(p)} f^(+-N)|.
std::vector<double> log_det_sequence(const MapDescriptor& map, TorusPoint p,
                                     long n, Direction dir);

}  // namespace plisskit::cocycle
