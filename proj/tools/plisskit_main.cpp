// plisskit - Pliss times, cocycle pinching scans and explicit constant
// schedules for torus diffeomorphisms.
//
//   plisskit exponents --map cat --n 100000
//   plisskit constants --map cat --t 0.96
//   plisskit pliss --input seq.txt --alpha3 0.0
//   plisskit cp-scan --map pcat --eps 0.05 --t 0.96 --out run1/
//   plisskit report-diff run1/report.json run2/report.json
//
// Exit codes: 0 success, 1 semantic red flag (hypothesis holds but the CP
// set is empty), 2 usage, 3 map/domain error, 4 scheduler error, 5 IO.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "plisskit/experiment.hpp"
#include "plisskit/pliss.hpp"

namespace {

using namespace plisskit;

std::string fmt(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

struct MapOpts {
    std::string map = "cat";
    double eps = 0.0;
    double K = 0.0;
    int N = 1;
};

void add_map_options(CLI::App* sub, MapOpts& mo) {
    sub->add_option("--map", mo.map, "map family: cat | pcat | std")
        ->check(CLI::IsMember({"cat", "pcat", "std"}));
    sub->add_option("--eps", mo.eps, "perturbation strength (pcat)");
    sub->add_option("--K", mo.K, "kick strength (std)");
    sub->add_option("--N", mo.N, "iterate power: analyze f^N")->check(CLI::PositiveNumber);
}

maps::MapDescriptor to_descriptor(const MapOpts& mo) {
    if (mo.map == "pcat") return maps::MapDescriptor::perturbed_cat(mo.eps, mo.N);
    if (mo.map == "std") return maps::MapDescriptor::standard_map(mo.K, mo.N);
    return maps::MapDescriptor::cat(mo.N);
}

std::optional<double> parse_s(const std::string& s) {
    if (s == "auto") return std::nullopt;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (...) {
        pos = std::string::npos;
    }
    if (pos != s.size())
        throw CLI::ValidationError("--s", "must be a real number or 'auto'");
    return v;
}

// Config files are flat `key = value` text with `#` comments, keys equal to
// the long flag names.  They are expanded into synthetic command-line tokens
// placed directly after the subcommand name, so explicit flags (which come
// later and options take the last occurrence) override config values, and
// unknown keys fail parsing like any unknown flag.
std::vector<std::string> load_config_tokens(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    auto trim = [](const std::string& s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::vector<std::string> out;
    std::string line;
    while (std::getline(f, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string item = trim(line);
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            out.push_back("--" + item);  // bare key = flag
            continue;
        }
        std::string key = trim(item.substr(0, eq));
        std::string val = trim(item.substr(eq + 1));
        if (val.size() >= 2 && ((val.front() == '"' && val.back() == '"') ||
                                (val.front() == '\'' && val.back() == '\'')))
            val = val.substr(1, val.size() - 2);
        if (val.empty() || val == "true" || val == "false") {
            out.push_back("--" + key + "=" + val);
            continue;
        }
        out.push_back("--" + key);
        std::istringstream vs(val);
        std::string tok;
        while (vs >> tok) out.push_back(tok);  // multi-token values, e.g. --bound
    }
    return out;
}

std::vector<std::string> expand_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::size_t sub = args.size();
    for (std::size_t i = 0; i < args.size(); ++i)
        if (!args[i].empty() && args[i][0] != '-') {
            sub = i;
            break;
        }
    if (sub == args.size()) return args;
    std::vector<std::string> expanded;
    for (std::size_t i = sub + 1; i < args.size();) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            auto toks = load_config_tokens(args[i + 1]);
            expanded.insert(expanded.end(), toks.begin(), toks.end());
            args.erase(args.begin() + static_cast<long>(i),
                       args.begin() + static_cast<long>(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            auto toks = load_config_tokens(args[i].substr(9));
            expanded.insert(expanded.end(), toks.begin(), toks.end());
            args.erase(args.begin() + static_cast<long>(i));
        } else {
            ++i;
        }
    }
    args.insert(args.begin() + static_cast<long>(sub) + 1, expanded.begin(), expanded.end());
    return args;
}

void use_config(CLI::App* sub, std::string& sink) {
    sub->add_option("--config", sink,
                    "flat key = value file with # comments; flags override it");
}

// --- exponents ---------------------------------------------------------

struct ExponentsOpts {
    MapOpts mo;
    long n = 10000;
    long samples = 4;
    std::uint64_t seed = 1;
    int window = 40;
    std::string csv;
};

void run_exponents(const ExponentsOpts& o) {
    maps::MapDescriptor map = to_descriptor(o.mo);
    std::vector<maps::TorusPoint> bases = experiment::sample_points(o.samples, o.seed);

    std::ostringstream csv;
    csv << "sample_id,x0,y0,lambda_u,lambda_s,residual,degenerate\n";
    std::printf("%-8s %-12s %-12s %-16s %-16s %-10s %s\n", "sample", "x0", "y0",
                "lambda_u", "lambda_s", "residual", "note");
    double sum_u = 0.0, sum_s = 0.0, max_res = 0.0;
    for (long i = 0; i < o.samples; ++i) {
        cocycle::LyapunovEstimate ly = cocycle::ftle(map, bases[i], o.n);
        bool degen = false;
        try {
            cocycle::oseledets_directions(map, bases[i], o.window);
        } catch (const DegenerateSplitting&) {
            degen = true;
        }
        std::printf("%-8ld %-12.8f %-12.8f %-16.10f %-16.10f %-10.2e %s\n", i,
                    bases[i].x, bases[i].y, ly.lambda_u, ly.lambda_s, ly.residual,
                    degen ? "degenerate" : "-");
        csv << i << ',' << fmt(bases[i].x) << ',' << fmt(bases[i].y) << ','
            << fmt(ly.lambda_u) << ',' << fmt(ly.lambda_s) << ','
            << fmt(ly.residual) << ',' << int(degen) << '\n';
        sum_u += ly.lambda_u;
        sum_s += ly.lambda_s;
        max_res = std::max(max_res, ly.residual);
    }
    std::printf("mean lambda_u=%.10f lambda_s=%.10f max_residual=%.2e\n",
                sum_u / o.samples, sum_s / o.samples, max_res);

    if (!o.csv.empty()) {
        std::ofstream f(o.csv, std::ios::binary);
        if (!f) throw IoError("cannot open for writing: " + o.csv);
        f << csv.str();
        if (!f.flush()) throw IoError("write failed: " + o.csv);
    }
}

// --- pliss -------------------------------------------------------------

struct PlissOpts {
    std::string input;
    double alpha3 = 0.0;
    std::vector<double> bound_args;  // alpha1 alpha2
    bool print_times = false;
};

void run_pliss(const PlissOpts& o) {
    std::vector<double> seq;
    auto read_from = [&seq](std::istream& in) {
        double v;
        while (in >> v) seq.push_back(v);
        if (!in.eof()) throw IoError("sequence file contains a non-numeric token");
    };
    if (o.input == "-") {
        read_from(std::cin);
    } else {
        std::ifstream f(o.input);
        if (!f) throw IoError("cannot open: " + o.input);
        read_from(f);
    }

    std::vector<std::size_t> times = pliss::pliss_times(seq, o.alpha3);
    std::printf("n=%zu pliss=%zu density=%s", seq.size(), times.size(),
                fmt(static_cast<double>(times.size()) / static_cast<double>(seq.size())).c_str());
    if (o.bound_args.size() == 2) {
        double bound = pliss::density_bound(o.bound_args[0], o.bound_args[1], o.alpha3);
        std::printf(" bound=%s", fmt(bound).c_str());
    }
    std::printf("\n");
    if (o.print_times) {
        for (std::size_t i = 0; i < times.size(); ++i)
            std::printf("%s%zu", i ? " " : "", times[i]);
        std::printf("\n");
    }
}

// --- constants ---------------------------------------------------------

struct ConstantsOpts {
    MapOpts mo;
    double t = 0.0;
    std::string s = "auto";
    int grid = 512;
    int threads = 0;
    bool json = false;
};

void run_constants(const ConstantsOpts& o) {
    maps::MapDescriptor map = to_descriptor(o.mo);
    std::optional<double> s = parse_s(o.s);
    maps::MapBounds b = maps::estimate_bounds(map, o.grid, o.threads);
    cp::CPConstants c = cp::schedule_constants({o.t, s, b, o.mo.N});

    if (o.json) {
        nlohmann::json j;
        j["bounds"] = {{"alpha", b.alpha},
                       {"beta", b.beta},
                       {"r_estimate", b.r_estimate},
                       {"grid_density", b.grid_density}};
        j["constants"] = {{"t", c.t},         {"s", c.s},
                          {"delta_t", c.delta_t}, {"sigma", c.sigma},
                          {"rho", c.rho},     {"sigma_t1", c.sigma_t1},
                          {"sigma_t2", c.sigma_t2}, {"rho_t1", c.rho_t1},
                          {"rho_t2", c.rho_t2},     {"eta", c.eta},
                          {"N", c.N}};
        std::printf("%s\n", j.dump(2).c_str());
        return;
    }
    std::printf("map=%s N=%d grid=%d\n", o.mo.map.c_str(), o.mo.N, o.grid);
    std::printf("alpha=%.10g beta=%.10g r_estimate=%.10g\n", b.alpha, b.beta, b.r_estimate);
    std::printf("t=%.10g s=%.10g s_interval=(%.10g,%.10g)\n", c.t, c.s, c.s_lo, c.s_hi);
    std::printf("delta_t=%.10g\n", c.delta_t);
    std::printf("sigma=%.10g rho=%.10g\n", c.sigma, c.rho);
    std::printf("sigma_t1=%.10g sigma_t2=%.10g\n", c.sigma_t1, c.sigma_t2);
    std::printf("rho_t1=%.10g rho_t2=%.10g\n", c.rho_t1, c.rho_t2);
    std::printf("eta=%.10g\n", c.eta);
    double denom = c.sigma * c.rho;
    std::printf("side_condition_1=%.10g side_condition_2=%.10g (> sigma)\n",
                c.sigma_t1 * c.rho_t1 / denom, c.sigma_t2 * c.rho_t2 / denom);
}

// --- cp-scan -----------------------------------------------------------

struct ScanOpts {
    MapOpts mo;
    experiment::ScanConfig cfg;
    std::string s = "auto";
    int threads = 0;
    std::string out = "plisskit-run";
};

// Returns true when the run is a semantic red flag: hypothesis verified but
// the empirical CP set came out empty.
bool run_cp_scan(ScanOpts& o) {
    o.cfg.map = to_descriptor(o.mo);
    o.cfg.s = parse_s(o.s);
    experiment::CPScanReport rep = experiment::run_scan(o.cfg, o.threads);
    experiment::write_report(rep, o.out);
    std::printf("mu_cp=%.10g bound=%.10g hypothesis=%s clusters=%ld\n", rep.mu_cp,
                rep.paper_lower_bound, rep.hypothesis_ok ? "ok" : "fail",
                rep.cluster_count);
    return rep.hypothesis_ok && rep.mu_cp == 0.0;
}

// --- report-diff -------------------------------------------------------

nlohmann::json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
}

void diff_json(const nlohmann::json& a, const nlohmann::json& b,
               const std::string& path, double tol, long& count) {
    auto report = [&](const std::string& msg) {
        std::printf("%s: %s\n", path.empty() ? "(root)" : path.c_str(), msg.c_str());
        ++count;
    };
    if (a.is_object() && b.is_object()) {
        for (auto& [key, value] : a.items()) {
            std::string sub = path.empty() ? key : path + "." + key;
            if (!b.contains(key))
                std::printf("%s: missing on right\n", sub.c_str()), ++count;
            else
                diff_json(value, b.at(key), sub, tol, count);
        }
        for (auto& [key, value] : b.items())
            if (!a.contains(key))
                std::printf("%s: missing on left\n",
                            (path.empty() ? key : path + "." + key).c_str()),
                    ++count;
        return;
    }
    if (a.is_array() && b.is_array()) {
        if (a.size() != b.size()) {
            report("array length " + std::to_string(a.size()) + " != " +
                   std::to_string(b.size()));
            return;
        }
        for (std::size_t i = 0; i < a.size(); ++i)
            diff_json(a[i], b[i], path + "[" + std::to_string(i) + "]", tol, count);
        return;
    }
    if (a.is_number() && b.is_number()) {
        double x = a.get<double>(), y = b.get<double>();
        if (!(std::fabs(x - y) <= tol)) report(fmt(x) + " != " + fmt(y));
        return;
    }
    if (a != b) report(a.dump() + " != " + b.dump());
}

bool run_report_diff(const std::string& left, const std::string& right, double tol) {
    nlohmann::json a = load_json(left);
    nlohmann::json b = load_json(right);
    long count = 0;
    diff_json(a, b, "", tol, count);
    if (count == 0) {
        std::printf("identical\n");
        return false;
    }
    std::printf("%ld difference%s\n", count, count == 1 ? "" : "s");
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pliss times, cocycle pinching scans and explicit constant "
                 "schedules for torus diffeomorphisms"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    int red_flag = 0;
    std::string config_path;  // consumed by expand_args; registered for --help

    ExponentsOpts eo;
    CLI::App* exponents = app.add_subcommand("exponents", "finite-time Lyapunov exponents");
    add_map_options(exponents, eo.mo);
    exponents->add_option("--n", eo.n, "orbit steps per sample")->check(CLI::Range(2L, 1000000000L));
    exponents->add_option("--samples", eo.samples, "number of initial points")->check(CLI::PositiveNumber);
    exponents->add_option("--seed", eo.seed, "sampler seed");
    exponents->add_option("--window", eo.window, "direction-estimate window")->check(CLI::PositiveNumber);
    exponents->add_option("--csv", eo.csv, "write per-sample CSV here");
    use_config(exponents, config_path);
    exponents->callback([&eo] { run_exponents(eo); });

    PlissOpts po;
    CLI::App* pliss_cmd = app.add_subcommand("pliss", "Pliss times of a sequence");
    pliss_cmd->add_option("--input", po.input, "sequence file (- for stdin)")->required();
    pliss_cmd->add_option("--alpha3", po.alpha3, "Pliss threshold")->required();
    pliss_cmd->add_option("--bound", po.bound_args,
                          "alpha1 alpha2: also print the guaranteed density")
        ->expected(2);
    pliss_cmd->add_flag("--print-times", po.print_times, "list the Pliss indices");
    use_config(pliss_cmd, config_path);
    pliss_cmd->callback([&po] { run_pliss(po); });

    ConstantsOpts co;
    CLI::App* constants = app.add_subcommand("constants", "derivative bounds and the constant schedule");
    add_map_options(constants, co.mo);
    constants->add_option("--t", co.t, "schedule parameter, must exceed 19/20")->required();
    constants->add_option("--s", co.s, "schedule exponent or 'auto'");
    constants->add_option("--grid", co.grid, "bound-estimate grid density")->check(CLI::PositiveNumber);
    constants->add_option("--threads", co.threads, "parallel grid threads (0 = all)")
        ->envname("PLISSKIT_THREADS");
    constants->add_flag("--json", co.json, "print bounds and constants as JSON");
    use_config(constants, config_path);
    constants->callback([&co] { run_constants(co); });

    ScanOpts so;
    CLI::App* scan = app.add_subcommand("cp-scan", "full membership scan with report output");
    add_map_options(scan, so.mo);
    scan->add_option("--t", so.cfg.t, "schedule parameter, must exceed 19/20")->required();
    scan->add_option("--s", so.s, "schedule exponent or 'auto'");
    scan->add_option("--samples", so.cfg.samples, "number of initial points")->check(CLI::PositiveNumber);
    scan->add_option("--orbit", so.cfg.orbit_length, "orbit length per sample")->check(CLI::PositiveNumber);
    scan->add_option("--window", so.cfg.window, "direction-estimate window")->check(CLI::PositiveNumber);
    scan->add_option("--H", so.cfg.horizon, "membership horizon")->check(CLI::PositiveNumber);
    scan->add_option("--delta", so.cfg.delta, "clustering radius");
    scan->add_option("--seed", so.cfg.seed, "sampler seed");
    scan->add_option("--grid", so.cfg.grid_density, "bound-estimate grid density")->check(CLI::PositiveNumber);
    scan->add_option("--threads", so.threads, "parallel sample threads (0 = all)")
        ->envname("PLISSKIT_THREADS");
    scan->add_option("--out", so.out, "output directory");
    use_config(scan, config_path);
    scan->callback([&so, &red_flag] { red_flag = run_cp_scan(so) ? 1 : 0; });

    std::string diff_left, diff_right;
    double diff_tol = 0.0;
    CLI::App* rdiff = app.add_subcommand("report-diff", "compare two report.json files");
    rdiff->add_option("left", diff_left, "first report")->required();
    rdiff->add_option("right", diff_right, "second report")->required();
    rdiff->add_option("--tol", diff_tol, "numeric tolerance (default exact)");
    rdiff->callback([&diff_left, &diff_right, &diff_tol, &red_flag] {
        red_flag = run_report_diff(diff_left, diff_right, diff_tol) ? 1 : 0;
    });

    try {
        std::vector<std::string> args = expand_args(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 takes reversed args
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::FileError& e) {
        app.exit(e);
        return 5;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const SchedulerError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return red_flag;
}
