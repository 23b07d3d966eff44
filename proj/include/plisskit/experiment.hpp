#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "plisskit/cocycle.hpp"
#include "plisskit/cp.hpp"
#include "plisskit/maps.hpp"

namespace plisskit::experiment {

using maps::MapDescriptor;
using maps::TorusPoint;

struct ScanConfig {
    MapDescriptor map;
    long samples = 16;
    long orbit_length = 4096;
    int window = 40;
    int horizon = 64;
    double t = 0.0;
    std::optional<double> s;  // empty = auto
    double delta = 0.1;       // clustering radius
    std::uint64_t seed = 1;
    int grid_density = 512;
};

// Throws PreconditionNotMet unless samples >= 1, window >= 1, horizon >= 1
// and orbit_length >= window + horizon.
void validate(const ScanConfig& config);

// Deterministic grid-jitter sampler: samples cells of the smallest g x g grid
// with g^2 >= samples, one uniform jitter per cell, derived from the seed via
// splitmix64 so the sequence is platform-independent.
std::vector<TorusPoint> sample_points(long samples, std::uint64_t seed);

// One row per sample in the report/CSV. Flags and cos_angle are evaluated at
// the base point itself (orbit index 0); cp additionally requires d3 at the
// next orbit point. degenerate marks samples where direction estimation
// failed at the base point.
struct SampleRecord {
    long sample_id = 0;
    TorusPoint base;
    cocycle::LyapunovEstimate lyap;
    bool degenerate = false;
    cp::DeltaFlags flags;
    bool cp_flag = false;
    double cos_angle = 0.0;
};

struct CPScanReport {
    maps::MapBounds bounds;
    cp::CPConstants consts;
    std::array<double, 5> mu_delta{};
    double mu_cp = 0.0;
    double paper_lower_bound = 0.0;  // (t - st)/(1 - st)
    bool hypothesis_ok = false;
    long cluster_count = 0;
    std::vector<SampleRecord> samples;
    ScanConfig config;
    // Angle-claim audit over all evaluation points (not serialized):
    // points with d1 here and d3 at the next point must satisfy d5.
    long angle_checked = 0;
    long angle_violations = 0;
    long eval_points = 0;  // evaluation points per sample after trimming
};

// Fraction of orbit points k = w .. orbit_length - H where pred(k, p_k)
// holds. Throws OrbitTooShort when that range is empty.
double birkhoff_measure(const MapDescriptor& map, TorusPoint p, long orbit_length,
                        const std::function<bool(long, TorusPoint)>& pred,
                        int window = 40, int horizon = 64);

// Full scan: derivative bounds, constant schedule, FTLE hypothesis check,
// per-sample membership flags, Birkhoff measures of Delta_1..Delta_5 and of
// the CP intersection (with the f^-1(Delta_3) shift), and clustering of the
// CP-flagged points. Samples run in parallel (threads = 0 picks the runtime
// default); results are merged by sample index so the report is byte-stable
// under any thread count. run_scan_serial is the plain-loop reference.
CPScanReport run_scan(const ScanConfig& config, int threads = 0);
CPScanReport run_scan_serial(const ScanConfig& config);

// Single-linkage components joining points at toroidal distance < delta.
long cluster_cp_points(std::span<const TorusPoint> points, double delta);

// Serialization. report_to_json holds exactly the keys
//   bounds, constants, mu_delta, mu_cp, paper_lower_bound, hypothesis_ok,
//   cluster_count, config
// and write_report places report.json, samples.csv and config.txt (a flat
// key = value echo reusable via --config) in dir. IO failures throw IoError
// with the offending path in the message.
nlohmann::json report_to_json(const CPScanReport& report);
std::string samples_csv(const CPScanReport& report);
std::string config_echo(const ScanConfig& config);
void write_report(const CPScanReport& report, const std::filesystem::path& dir);

}  // namespace plisskit::experiment
