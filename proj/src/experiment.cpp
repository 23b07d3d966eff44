#include "plisskit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace plisskit::experiment {

using maps::Direction;

void validate(const ScanConfig& config) {
    if (config.samples < 1) throw PreconditionNotMet("samples must be >= 1");
    if (config.window < 1) throw PreconditionNotMet("window must be >= 1");
    if (config.horizon < 1) throw PreconditionNotMet("horizon must be >= 1");
    if (config.orbit_length < config.window + config.horizon)
        throw PreconditionNotMet("orbit_length must be >= window + horizon");
    if (!(config.delta > 0.0)) throw PreconditionNotMet("delta must be positive");
    if (config.grid_density < 2) throw PreconditionNotMet("grid_density must be >= 2");
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double unit_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<TorusPoint> sample_points(long samples, std::uint64_t seed) {
    if (samples < 1) throw PreconditionNotMet("samples must be >= 1");
    long g = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(samples))));
    while (g * g < samples) ++g;

    std::vector<TorusPoint> out;
    out.reserve(samples);
    for (long s = 0; s < samples; ++s) {
        // Independent stream per sample so parallel consumers could
        // regenerate points without sharing state.
        std::uint64_t st = seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(s + 1));
        double u = unit_from_bits(splitmix64(st));
        double v = unit_from_bits(splitmix64(st));
        long col = s % g, row = s / g;
        out.push_back({(static_cast<double>(col) + u) / static_cast<double>(g),
                       (static_cast<double>(row) + v) / static_cast<double>(g)});
    }
    return out;
}

double birkhoff_measure(const MapDescriptor& map, TorusPoint p, long orbit_length,
                        const std::function<bool(long, TorusPoint)>& pred,
                        int window, int horizon) {
    maps::validate(map);
    const long k_lo = window, k_hi = orbit_length - horizon;
    if (k_lo > k_hi)
        throw OrbitTooShort("orbit_length must be >= window + horizon");

    long hits = 0;
    TorusPoint q = p;
    for (long k = 0; k <= k_hi; ++k) {
        if (k >= k_lo && pred(k, q)) ++hits;
        if (k < k_hi) q = maps::apply(map, q, Direction::Forward);
    }
    return static_cast<double>(hits) / static_cast<double>(k_hi - k_lo + 1);
}

long cluster_cp_points(std::span<const TorusPoint> points, double delta) {
    const long n = static_cast<long>(points.size());
    if (n == 0) return 0;

    std::vector<long> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](long x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j)
            if (maps::toroidal_distance(points[i], points[j]) < delta) {
                long ri = find(i), rj = find(j);
                if (ri != rj) parent[ri] = rj;
            }

    long clusters = 0;
    for (long i = 0; i < n; ++i)
        if (find(i) == i) ++clusters;
    return clusters;
}

namespace {

// Cap on CP-flagged orbit points kept per sample for clustering; the strided
// subset keeps the cluster input small while still filling the torus when
// the flagged set does.
constexpr long kClusterKeepPerSample = 32;

struct SampleTally {
    SampleRecord record;
    std::array<long, 5> counts{};
    long cp_count = 0;
    long evals = 0;
    long angle_checked = 0;
    long angle_violations = 0;
    std::vector<TorusPoint> thinned;
};

SampleTally analyze_sample(const ScanConfig& cfg, const cp::CPConstants& consts,
                           long id, TorusPoint base) {
    const long L = cfg.orbit_length;
    const int w = cfg.window, H = cfg.horizon;

    // One bundle covers the base point, every Birkhoff evaluation index and
    // the one-step shift needed by the CP intersection.
    cp::OrbitBundle bundle =
        cp::build_orbit_bundle(cfg.map, base, -(H + 1), L + H + 1, w);

    SampleTally t;
    t.record.sample_id = id;
    t.record.base = base;
    t.record.lyap = cocycle::ftle(cfg.map, base, L);
    t.record.degenerate = bundle.valid[bundle.slot(0)] == 0;
    t.record.flags = cp::flags_at(bundle, 0, consts, H);
    t.record.cp_flag = t.record.flags.all() && cp::flags_at(bundle, 1, consts, H).d3;
    t.record.cos_angle = t.record.degenerate
                             ? std::numeric_limits<double>::quiet_NaN()
                             : bundle.cosang[bundle.slot(0)];

    // Trimmed evaluation range, plus one extra slot for the d3 shift.
    const long k_lo = w, k_hi = L - H;
    std::vector<cp::DeltaFlags> flags(k_hi - k_lo + 2);
    for (long k = k_lo; k <= k_hi + 1; ++k)
        flags[k - k_lo] = cp::flags_at(bundle, k, consts, H);

    t.evals = k_hi - k_lo + 1;
    const long stride = std::max(1L, t.evals / kClusterKeepPerSample);
    for (long k = k_lo; k <= k_hi; ++k) {
        const cp::DeltaFlags& f = flags[k - k_lo];
        const cp::DeltaFlags& next = flags[k - k_lo + 1];
        t.counts[0] += f.d1;
        t.counts[1] += f.d2;
        t.counts[2] += f.d3;
        t.counts[3] += f.d4;
        t.counts[4] += f.d5;
        bool cp_here = f.all() && next.d3;
        t.cp_count += cp_here;
        if (f.d1 && next.d3) {
            ++t.angle_checked;
            if (bundle.cosang[bundle.slot(k)] > consts.eta + cp::kCompareSlack)
                ++t.angle_violations;
        }
        if (cp_here && (k - k_lo) % stride == 0)
            t.thinned.push_back(bundle.points[bundle.slot(k)]);
    }
    return t;
}

CPScanReport run_scan_impl(const ScanConfig& cfg, int threads, bool parallel) {
    validate(cfg);
    maps::validate(cfg.map);

    CPScanReport rep;
    rep.config = cfg;
    rep.bounds = parallel ? maps::estimate_bounds(cfg.map, cfg.grid_density, threads)
                          : maps::estimate_bounds_serial(cfg.map, cfg.grid_density);
    rep.consts = cp::schedule_constants(
        {cfg.t, cfg.s, rep.bounds, cfg.map.iterate_power});
    rep.paper_lower_bound =
        (cfg.t - rep.consts.s * cfg.t) / (1.0 - rep.consts.s * cfg.t);

    std::vector<TorusPoint> bases = sample_points(cfg.samples, cfg.seed);

    // Hypothesis check from one dedicated long FTLE run; short runs would
    // trip the convergence gate on fluctuations alone.
    try {
        long n_hyp = std::max(100000L, cfg.orbit_length);
        rep.hypothesis_ok =
            cp::check_hypothesis(cocycle::ftle(cfg.map, bases[0], n_hyp), rep.bounds);
    } catch (const NotConverged&) {
        rep.hypothesis_ok = false;
    }

    std::vector<SampleTally> tallies(cfg.samples);
    if (parallel) {
#ifdef _OPENMP
        int nt = threads > 0 ? threads : omp_get_max_threads();
#else
        int nt = 1;
        (void)nt;
#endif
        std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) num_threads(nt)
        for (long i = 0; i < cfg.samples; ++i) {
            try {
                tallies[i] = analyze_sample(cfg, rep.consts, i, bases[i]);
            } catch (...) {
#pragma omp critical
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
    } else {
        for (long i = 0; i < cfg.samples; ++i)
            tallies[i] = analyze_sample(cfg, rep.consts, i, bases[i]);
    }

    // Deterministic merge in sample order, independent of completion order.
    std::array<long, 5> counts{};
    long cp_count = 0, evals = 0;
    std::vector<TorusPoint> cluster_input;
    for (const SampleTally& t : tallies) {
        rep.samples.push_back(t.record);
        for (int i = 0; i < 5; ++i) counts[i] += t.counts[i];
        cp_count += t.cp_count;
        evals += t.evals;
        rep.angle_checked += t.angle_checked;
        rep.angle_violations += t.angle_violations;
        cluster_input.insert(cluster_input.end(), t.thinned.begin(), t.thinned.end());
    }
    rep.eval_points = evals / cfg.samples;
    for (int i = 0; i < 5; ++i)
        rep.mu_delta[i] = static_cast<double>(counts[i]) / static_cast<double>(evals);
    rep.mu_cp = static_cast<double>(cp_count) / static_cast<double>(evals);
    rep.cluster_count = cluster_cp_points(cluster_input, cfg.delta);
    return rep;
}

}  // namespace

CPScanReport run_scan(const ScanConfig& config, int threads) {
    return run_scan_impl(config, threads, true);
}

CPScanReport run_scan_serial(const ScanConfig& config) {
    return run_scan_impl(config, 0, false);
}

}  // namespace plisskit::experiment
