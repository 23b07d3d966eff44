#pragma once

#include <cmath>
#include <string>

#include "plisskit/errors.hpp"

namespace plisskit::maps {

// Plain 2-vector in the tangent space (not reduced mod 1).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    Vec2 normalized() const {
        double n = norm();
        return {x / n, y / n};
    }
    // 90-degree rotation; in 2d the orthogonal complement of a unit vector.
    Vec2 perp() const { return {-y, x}; }
};

// Point on the unit torus, coordinates in [0, 1).
struct TorusPoint {
    double x = 0.0;
    double y = 0.0;
};

// Reduce mod 1 with floor; guards the x == -1e-18 style case where
// x - floor(x) rounds up to exactly 1.0.
double wrap1(double v);
TorusPoint wrap(double x, double y);

// Distance on the torus: per-axis wrap-around, equivalent to minimizing the
// Euclidean distance over the 9 integer translates of one argument.
double toroidal_distance(const TorusPoint& a, const TorusPoint& b);

// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static Mat2 identity() { return {}; }

    double det() const { return a * d - b * c; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Vec2 operator*(const Vec2& v) const {
        return {a * v.x + b * v.y, c * v.x + d * v.y};
    }

    Mat2 transposed() const { return {a, c, b, d}; }
    Mat2 inverse() const;

    // Largest singular value, closed form via the eigenvalues of M^T M.
    double spectral_norm() const;
};

enum class Family { ArnoldCat, PerturbedCat, StandardMap };

enum class Direction { Forward, Backward };

// A torus diffeomorphism f^N where f is one of the built-in families and
// N = iterate_power >= 1. All apply/jacobian calls refer to the N-iterate.
struct MapDescriptor {
    Family family = Family::ArnoldCat;
    double eps = 0.0;  // PerturbedCat strength
    double K = 0.0;    // StandardMap kick
    int iterate_power = 1;

    static MapDescriptor cat(int N = 1) { return {Family::ArnoldCat, 0.0, 0.0, N}; }
    static MapDescriptor perturbed_cat(double eps, int N = 1) {
        return {Family::PerturbedCat, eps, 0.0, N};
    }
    static MapDescriptor standard_map(double K, int N = 1) {
        return {Family::StandardMap, 0.0, K, N};
    }
};

// Throws NonInvertibleParameters for out-of-range parameters
// (PerturbedCat needs |eps| < 1) or iterate_power < 1.
void validate(const MapDescriptor& map);

std::string family_name(Family f);

// One application of f^N (Forward) or f^-N (Backward).
TorusPoint apply(const MapDescriptor& map, TorusPoint p, Direction dir);

// d_p f^N (Forward) or d_p f^-N (Backward), chain rule along the orbit.
Mat2 jacobian(const MapDescriptor& map, TorusPoint p, Direction dir);

// Derivative bounds from a uniform grid scan:
//   beta  = max over grid of ||d f^N||
//   alpha = 1 / max over grid of ||d f^-N||
//   r_estimate = max(-log alpha, log beta) / N
struct MapBounds {
    double alpha = 0.0;
    double beta = 0.0;
    double r_estimate = 0.0;
    int grid_density = 0;
};

// OpenMP-parallel grid scan (threads = 0 picks the runtime default) and a
// plain serial reference kept for testing; the two must agree bitwise.
MapBounds estimate_bounds(const MapDescriptor& map, int grid_density, int threads = 0);
MapBounds estimate_bounds_serial(const MapDescriptor& map, int grid_density);

}  // namespace plisskit::maps
