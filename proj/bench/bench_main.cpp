// Timing comparison of the parallel kernels against their serial references.
// Checks agreement byte-for-byte while it is at it, so a speedup is never
// reported for diverging results.
#include <chrono>
#include <cstdio>
#include <string>

#include "plisskit/experiment.hpp"
#include "plisskit/maps.hpp"

using namespace plisskit;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_of(F&& f) {
    auto t0 = Clock::now();
    f();
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void row(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-28s %10.3fs %10.3fs %8.2fx   %s\n", name, serial, parallel,
                serial / parallel, identical ? "identical" : "DIVERGED");
}

}  // namespace

int main() {
    std::printf("%-28s %11s %11s %9s   %s\n", "kernel", "serial", "parallel",
                "speedup", "outputs");

    {
        maps::MapDescriptor m = maps::MapDescriptor::perturbed_cat(0.05, 1);
        maps::MapBounds bs, bp;
        double ts = time_of([&] { bs = maps::estimate_bounds_serial(m, 1024); });
        double tp = time_of([&] { bp = maps::estimate_bounds(m, 1024); });
        bool same = bs.alpha == bp.alpha && bs.beta == bp.beta &&
                    bs.r_estimate == bp.r_estimate;
        row("estimate_bounds grid=1024", ts, tp, same);
    }

    {
        experiment::ScanConfig c;
        c.map = maps::MapDescriptor::perturbed_cat(0.05, 1);
        c.samples = 32;
        c.orbit_length = 4000;
        c.window = 40;
        c.horizon = 64;
        c.t = 0.96;
        c.seed = 7;
        c.grid_density = 256;
        experiment::CPScanReport rs, rp;
        double ts = time_of([&] { rs = experiment::run_scan_serial(c); });
        double tp = time_of([&] { rp = experiment::run_scan(c); });
        bool same = experiment::report_to_json(rs).dump() ==
                    experiment::report_to_json(rp).dump();
        row("run_scan 32x4000", ts, tp, same);
    }

    return 0;
}
