#include "plisskit/maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace plisskit::maps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// One application of the base map f (N = 1), forward.
TorusPoint base_forward(const MapDescriptor& m, TorusPoint p) {
    switch (m.family) {
        case Family::ArnoldCat:
            return wrap(2.0 * p.x + p.y, p.x + p.y);
        case Family::PerturbedCat: {
            TorusPoint q = wrap(2.0 * p.x + p.y, p.x + p.y);
            return wrap(q.x + m.eps * std::sin(kTwoPi * q.y) / kTwoPi, q.y);
        }
        case Family::StandardMap: {
            double kick = m.K * std::sin(kTwoPi * p.x) / kTwoPi;
            return wrap(p.x + p.y + kick, p.y + kick);
        }
    }
    return p;
}

// Exact closed-form inverse of one application of f.
TorusPoint base_backward(const MapDescriptor& m, TorusPoint p) {
    switch (m.family) {
        case Family::ArnoldCat:
            return wrap(p.x - p.y, -p.x + 2.0 * p.y);
        case Family::PerturbedCat: {
            // f = g o A with g the x-shear by eps*sin(2 pi y)/(2 pi); g leaves
            // y alone so g^-1 is closed-form, then A^-1.
            double gx = p.x - m.eps * std::sin(kTwoPi * p.y) / kTwoPi;
            return wrap(gx - p.y, -gx + 2.0 * p.y);
        }
        case Family::StandardMap: {
            // x' = x + y', y' = y + (K/2pi) sin(2 pi x)  =>  x = x' - y'.
            double x = p.x - p.y;
            return wrap(x, p.y - m.K * std::sin(kTwoPi * x) / kTwoPi);
        }
    }
    return p;
}

Mat2 base_jacobian_forward(const MapDescriptor& m, TorusPoint p) {
    switch (m.family) {
        case Family::ArnoldCat:
            return {2.0, 1.0, 1.0, 1.0};
        case Family::PerturbedCat: {
            // d(g o A) = dg(A p) * dA
            double ay = wrap1(p.x + p.y);
            Mat2 dg{1.0, m.eps * std::cos(kTwoPi * ay), 0.0, 1.0};
            return dg * Mat2{2.0, 1.0, 1.0, 1.0};
        }
        case Family::StandardMap: {
            double c = m.K * std::cos(kTwoPi * p.x);
            return {1.0 + c, 1.0, c, 1.0};
        }
    }
    return Mat2::identity();
}

Mat2 base_jacobian_backward(const MapDescriptor& m, TorusPoint p) {
    switch (m.family) {
        case Family::ArnoldCat:
            return {1.0, -1.0, -1.0, 2.0};
        case Family::PerturbedCat: {
            Mat2 dginv{1.0, -m.eps * std::cos(kTwoPi * p.y), 0.0, 1.0};
            return Mat2{1.0, -1.0, -1.0, 2.0} * dginv;
        }
        case Family::StandardMap: {
            double c = m.K * std::cos(kTwoPi * (p.x - p.y));
            return {1.0, -1.0, -c, 1.0 + c};
        }
    }
    return Mat2::identity();
}

}  // namespace

double wrap1(double v) {
    double r = v - std::floor(v);
    if (r >= 1.0) r -= 1.0;
    return r;
}

TorusPoint wrap(double x, double y) { return {wrap1(x), wrap1(y)}; }

double toroidal_distance(const TorusPoint& a, const TorusPoint& b) {
    double dx = std::fabs(a.x - b.x);
    double dy = std::fabs(a.y - b.y);
    dx = std::min(dx, 1.0 - dx);
    dy = std::min(dy, 1.0 - dy);
    return std::hypot(dx, dy);
}

Mat2 Mat2::inverse() const {
    double dt = det();
    return {d / dt, -b / dt, -c / dt, a / dt};
}

double Mat2::spectral_norm() const {
    // Eigenvalues of M^T M are (q +- sqrt(q^2 - 4 det^2))/2 with
    // q = sum of squared entries.
    double q = a * a + b * b + c * c + d * d;
    double dt = det();
    double disc = q * q - 4.0 * dt * dt;
    if (disc < 0.0) disc = 0.0;
    return std::sqrt(0.5 * (q + std::sqrt(disc)));
}

void validate(const MapDescriptor& map) {
    if (map.iterate_power < 1)
        throw NonInvertibleParameters("iterate_power must be >= 1");
    if (map.family == Family::PerturbedCat && std::fabs(map.eps) >= 1.0)
        throw NonInvertibleParameters("PerturbedCat requires |eps| < 1");
}

std::string family_name(Family f) {
    switch (f) {
        case Family::ArnoldCat: return "cat";
        case Family::PerturbedCat: return "pcat";
        case Family::StandardMap: return "std";
    }
    return "?";
}

TorusPoint apply(const MapDescriptor& map, TorusPoint p, Direction dir) {
    validate(map);
    for (int i = 0; i < map.iterate_power; ++i)
        p = dir == Direction::Forward ? base_forward(map, p) : base_backward(map, p);
    return p;
}

Mat2 jacobian(const MapDescriptor& map, TorusPoint p, Direction dir) {
    validate(map);
    Mat2 J = Mat2::identity();
    for (int i = 0; i < map.iterate_power; ++i) {
        if (dir == Direction::Forward) {
            J = base_jacobian_forward(map, p) * J;
            p = base_forward(map, p);
        } else {
            J = base_jacobian_backward(map, p) * J;
            p = base_backward(map, p);
        }
    }
    return J;
}

namespace {

MapBounds bounds_from_maxima(double max_fwd, double max_bwd, int grid, int N) {
    MapBounds b;
    b.beta = max_fwd;
    b.alpha = 1.0 / max_bwd;
    b.r_estimate = std::max(-std::log(b.alpha), std::log(b.beta)) / N;
    b.grid_density = grid;
    return b;
}

}  // namespace

MapBounds estimate_bounds(const MapDescriptor& map, int grid_density, int threads) {
    validate(map);
    if (grid_density < 2) throw PreconditionNotMet("grid_density must be >= 2");
    const int g = grid_density;
    double max_fwd = 0.0, max_bwd = 0.0;
#ifdef _OPENMP
    int nt = threads > 0 ? threads : omp_get_max_threads();
#else
    (void)threads;
    int nt = 1;
    (void)nt;
#endif
#pragma omp parallel for schedule(static) num_threads(nt) \
    reduction(max : max_fwd) reduction(max : max_bwd)
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            TorusPoint p{static_cast<double>(i) / g, static_cast<double>(j) / g};
            max_fwd = std::max(max_fwd, jacobian(map, p, Direction::Forward).spectral_norm());
            max_bwd = std::max(max_bwd, jacobian(map, p, Direction::Backward).spectral_norm());
        }
    }
    return bounds_from_maxima(max_fwd, max_bwd, g, map.iterate_power);
}

MapBounds estimate_bounds_serial(const MapDescriptor& map, int grid_density) {
    validate(map);
    if (grid_density < 2) throw PreconditionNotMet("grid_density must be >= 2");
    const int g = grid_density;
    double max_fwd = 0.0, max_bwd = 0.0;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            TorusPoint p{static_cast<double>(i) / g, static_cast<double>(j) / g};
            max_fwd = std::max(max_fwd, jacobian(map, p, Direction::Forward).spectral_norm());
            max_bwd = std::max(max_bwd, jacobian(map, p, Direction::Backward).spectral_norm());
        }
    }
    return bounds_from_maxima(max_fwd, max_bwd, g, map.iterate_power);
}

}  // namespace plisskit::maps
