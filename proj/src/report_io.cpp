#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "plisskit/experiment.hpp"

namespace plisskit::experiment {

namespace {

// Shortest round-trip representation; keeps CSV/echo output byte-stable and
// exactly re-readable.
std::string fmt(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

nlohmann::json config_json(const ScanConfig& c) {
    nlohmann::json j;
    j["map"] = maps::family_name(c.map.family);
    j["eps"] = c.map.eps;
    j["K"] = c.map.K;
    j["N"] = c.map.iterate_power;
    j["samples"] = c.samples;
    j["orbit"] = c.orbit_length;
    j["window"] = c.window;
    j["H"] = c.horizon;
    j["t"] = c.t;
    if (c.s.has_value())
        j["s"] = *c.s;
    else
        j["s"] = "auto";
    j["delta"] = c.delta;
    j["seed"] = c.seed;
    j["grid"] = c.grid_density;
    return j;
}

}  // namespace

nlohmann::json report_to_json(const CPScanReport& r) {
    nlohmann::json j;
    j["bounds"] = {{"alpha", r.bounds.alpha},
                   {"beta", r.bounds.beta},
                   {"r_estimate", r.bounds.r_estimate},
                   {"grid_density", r.bounds.grid_density}};
    j["constants"] = {{"t", r.consts.t},
                      {"s", r.consts.s},
                      {"delta_t", r.consts.delta_t},
                      {"sigma", r.consts.sigma},
                      {"rho", r.consts.rho},
                      {"sigma_t1", r.consts.sigma_t1},
                      {"sigma_t2", r.consts.sigma_t2},
                      {"rho_t1", r.consts.rho_t1},
                      {"rho_t2", r.consts.rho_t2},
                      {"eta", r.consts.eta},
                      {"N", r.consts.N},
                      {"H", r.config.horizon}};
    j["mu_delta"] = r.mu_delta;
    j["mu_cp"] = r.mu_cp;
    j["paper_lower_bound"] = r.paper_lower_bound;
    j["hypothesis_ok"] = r.hypothesis_ok;
    j["cluster_count"] = r.cluster_count;
    j["config"] = config_json(r.config);
    return j;
}

std::string samples_csv(const CPScanReport& r) {
    std::ostringstream out;
    out << "sample_id,x0,y0,lambda_u,lambda_s,residual,d1,d2,d3,d4,d5,cp,cos_angle\n";
    for (const SampleRecord& s : r.samples) {
        out << s.sample_id << ',' << fmt(s.base.x) << ',' << fmt(s.base.y) << ','
            << fmt(s.lyap.lambda_u) << ',' << fmt(s.lyap.lambda_s) << ','
            << fmt(s.lyap.residual) << ',' << int(s.flags.d1) << ','
            << int(s.flags.d2) << ',' << int(s.flags.d3) << ',' << int(s.flags.d4)
            << ',' << int(s.flags.d5) << ',' << int(s.cp_flag) << ','
            << fmt(s.cos_angle) << '\n';
    }
    return out.str();
}

std::string config_echo(const ScanConfig& c) {
    std::ostringstream out;
    out << "map = " << maps::family_name(c.map.family) << '\n';
    out << "eps = " << fmt(c.map.eps) << '\n';
    out << "K = " << fmt(c.map.K) << '\n';
    out << "N = " << c.map.iterate_power << '\n';
    out << "samples = " << c.samples << '\n';
    out << "orbit = " << c.orbit_length << '\n';
    out << "window = " << c.window << '\n';
    out << "H = " << c.horizon << '\n';
    out << "t = " << fmt(c.t) << '\n';
    out << "s = " << (c.s.has_value() ? fmt(*c.s) : std::string("auto")) << '\n';
    out << "delta = " << fmt(c.delta) << '\n';
    out << "seed = " << c.seed << '\n';
    out << "grid = " << c.grid_density << '\n';
    return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << content;
    f.flush();
    if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_report(const CPScanReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory: " + dir.string());
    write_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
    write_file(dir / "samples.csv", samples_csv(report));
    write_file(dir / "config.txt", config_echo(report.config));
}

}  // namespace plisskit::experiment
