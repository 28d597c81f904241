// tcd: command-line front end for the transient change detection library.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tcd/tcd.hpp"

namespace {

using tcd::json;

int exit_code_for(tcd::ErrorKind kind) {
    switch (kind) {
        case tcd::ErrorKind::invalid_argument:
        case tcd::ErrorKind::unsupported: return 2;
        case tcd::ErrorKind::zero_probability:
        case tcd::ErrorKind::boundary_mle:
        case tcd::ErrorKind::unbounded_moment: return 3;
        case tcd::ErrorKind::state_explosion:
        case tcd::ErrorKind::grid_overflow: return 4;
    }
    return 2;
}

const char* kind_name(tcd::ErrorKind kind) {
    switch (kind) {
        case tcd::ErrorKind::invalid_argument: return "invalid_argument";
        case tcd::ErrorKind::zero_probability: return "zero_probability";
        case tcd::ErrorKind::boundary_mle: return "boundary_mle";
        case tcd::ErrorKind::state_explosion: return "state_explosion";
        case tcd::ErrorKind::unbounded_moment: return "unbounded_moment";
        case tcd::ErrorKind::grid_overflow: return "grid_overflow";
        case tcd::ErrorKind::unsupported: return "unsupported";
    }
    return "unknown";
}

int report_error(const std::string& kind, const std::string& message, int code) {
    json j{{"schema_version", tcd::kSchemaVersion}, {"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}};
    std::cerr << j.dump() << '\n';
    return code;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

tcd::WalkTrace load_walk(const std::string& series_path, const std::string& pair_path, tcd::DistributionPair* pair_out) {
    const auto series = tcd::read_series_csv(series_path);
    const auto pair = tcd::pair_from_json(tcd::read_json_file(pair_path));
    if (pair_out) *pair_out = pair;
    return tcd::random_walk(pair, series);
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
    return os.str();
}

// --- detect -----------------------------------------------------------------

struct DetectArgs {
    std::string series, pair, verify;
    std::optional<std::size_t> k;
};

int run_detect(const DetectArgs& a) {
    const auto walk = load_walk(a.series, a.pair, nullptr);
    if (!a.verify.empty()) {
        // Recompute the statistic of a previous detect document from the raw walk.
        const json doc = tcd::read_json_file(a.verify);
        double claimed = 0.0, recomputed = 0.0;
        try {
            if (doc.contains("intervals")) {
                claimed = doc.at("total_gain").get<double>();
                for (const auto& iv : doc.at("intervals")) {
                    const auto lo = iv.at("a_hat").get<std::size_t>(), hi = iv.at("b_hat").get<std::size_t>();
                    tcd::require(lo < hi && hi <= walk.n(), "interval outside the series");
                    recomputed += walk[hi] - walk[lo];
                }
            } else {
                claimed = doc.at("lambda").get<double>();
                const auto lo = doc.at("a_hat").get<std::size_t>(), hi = doc.at("b_hat").get<std::size_t>();
                tcd::require(lo <= hi && hi <= walk.n(), "interval outside the series");
                recomputed = walk[hi] - walk[lo];
            }
        } catch (const json::exception& e) {
            throw tcd::Error(tcd::ErrorKind::invalid_argument, std::string("malformed detect document: ") + e.what());
        }
        const bool ok = std::abs(claimed - recomputed) <= 1e-9;
        emit({{"schema_version", tcd::kSchemaVersion}, {"verified", ok}, {"claimed", claimed}, {"recomputed", recomputed}});
        return ok ? 0 : 3;
    }
    if (!a.k || *a.k == 1) {
        emit(tcd::to_json(tcd::mle_interval(walk)));
    } else {
        emit(tcd::to_json(tcd::mle_k_intervals(walk, *a.k)));
    }
    return 0;
}

// --- thresholds shared by monitor and threshold -------------------------------

struct CalibrationArgs {
    std::string method;
    std::optional<std::uint64_t> seed;
    std::size_t mc_reps = 100000;
};

tcd::ThresholdOptions calibration(const CalibrationArgs& a, const tcd::DistributionPair& pair) {
    tcd::ThresholdOptions o;
    if (a.method.empty()) {
        o.method = pair.finite_support() ? tcd::ThresholdMethod::exact_lattice : tcd::ThresholdMethod::monte_carlo;
    } else {
        o.method = tcd::method_from_string(a.method);
    }
    if (o.method == tcd::ThresholdMethod::exact_lattice && !pair.finite_support())
        throw tcd::Error(tcd::ErrorKind::unsupported,
                         "--method exact needs finitely supported base and change laws; use --method mc with --seed");
    if (o.method == tcd::ThresholdMethod::monte_carlo) {
        if (!a.seed) throw tcd::Error(tcd::ErrorKind::invalid_argument, "Monte Carlo calibration requires --seed");
        o.seed = *a.seed;
        o.replicates = a.mc_reps;
    }
    return o;
}

// --- monitor ----------------------------------------------------------------

struct MonitorArgs {
    std::string series, pair, trace;
    double alpha = 0.05, beta = 0.05;
    std::optional<double> h_alpha, h_beta;
    CalibrationArgs cal;
};

int run_monitor(const MonitorArgs& a) {
    tcd::require(a.alpha > 0 && a.alpha < 1, "alpha must lie in (0, 1)");
    tcd::require(a.beta > 0 && a.beta < 1, "beta must lie in (0, 1)");
    tcd::require(!a.h_alpha || *a.h_alpha > 0, "--h-alpha must be positive");
    tcd::require(!a.h_beta || *a.h_beta > 0, "--h-beta must be positive");
    tcd::DistributionPair pair;
    const auto walk = load_walk(a.series, a.pair, &pair);

    tcd::DetectorConfig config;
    if (a.h_alpha && a.h_beta) {
        config.alpha = a.alpha;
        config.beta = a.beta;
        config.n = walk.n();
        config.h_alpha = *a.h_alpha;
        config.h_beta_tilde = *a.h_beta;
        config.method = pair.finite_support() ? tcd::ThresholdMethod::exact_lattice : tcd::ThresholdMethod::monte_carlo;
    } else {
        config = tcd::familywise_thresholds(pair, walk.n(), a.alpha, a.beta, calibration(a.cal, pair));
        if (a.h_alpha) config.h_alpha = *a.h_alpha;
        if (a.h_beta) config.h_beta_tilde = *a.h_beta;
    }
    tcd::DetectionTrace trace;
    const auto report = tcd::sequential_detect(walk, config, a.trace.empty() ? nullptr : &trace);
    if (!a.trace.empty()) {
        std::ofstream out(a.trace);
        if (!out) throw tcd::Error(tcd::ErrorKind::invalid_argument, "cannot write " + a.trace);
        tcd::write_detection_trace_csv(out, trace);
    }
    json j = tcd::to_json(report);
    j["thresholds"] = tcd::to_json(config);
    j["thresholds"].erase("schema_version");
    emit(j);
    return 0;
}

// --- glr --------------------------------------------------------------------

struct GlrArgs {
    std::string series, family = "normal";
    double omega = 0.6;
    double threshold = 0.0;
    std::optional<double> theta0, theta1;
};

int run_glr(const GlrArgs& a) {
    tcd::require(a.threshold >= 0, "--threshold must be nonnegative");
    const auto series = tcd::read_series_csv(a.series);
    tcd::GlrConfig config;
    config.omega = a.omega;
    config.h = a.threshold;
    config.theta0 = a.theta0;
    config.theta1 = a.theta1;
    const tcd::ExponentialFamilyModel family{tcd::family_from_string(a.family)};
    const auto run = tcd::glr_stopping_time(series, family, config, 0, true);
    json j{{"schema_version", tcd::kSchemaVersion},
           {"stopping_time", run.stopping_time ? json(*run.stopping_time) : json(nullptr)},
           {"w_hat", run.w_hat}};
    if (run.stopping_time) j["k_hat"] = tcd::estimated_cusum_at(series, family, config, *run.stopping_time).k;
    emit(j);
    return 0;
}

// --- threshold --------------------------------------------------------------

struct ThresholdArgs {
    std::string pair;
    std::size_t n = 0;
    double alpha = 0.05;
    std::optional<double> beta;
    CalibrationArgs cal;
};

int run_threshold(const ThresholdArgs& a) {
    tcd::require(a.alpha > 0 && a.alpha < 1, "alpha must lie in (0, 1)");
    const auto pair = tcd::pair_from_json(tcd::read_json_file(a.pair));
    const auto options = calibration(a.cal, pair);
    if (a.beta) {
        emit(tcd::to_json(tcd::familywise_thresholds(pair, a.n, a.alpha, *a.beta, options)));
    } else {
        emit(tcd::to_json(tcd::false_alarm_threshold(pair, a.n, a.alpha, options)));
    }
    return 0;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string config, out_dir = ".";
    std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& a) {
    auto config = tcd::experiment_config_from_json(tcd::read_json_file(a.config));
    config.seed = a.seed;
    const auto result = tcd::run_experiment(config);
    std::filesystem::create_directories(a.out_dir);
    const std::string stem = (std::filesystem::path(a.out_dir) /
                              (std::string(tcd::to_string(config.kind)) + "-" + timestamp()))
                                 .string();
    tcd::export_results(result, stem + ".json", tcd::ExportFormat::json);
    tcd::export_results(result, stem + ".csv", tcd::ExportFormat::csv);
    std::cerr << "wrote " << stem << ".json and " << stem << ".csv\n";
    emit(tcd::to_json(result));
    return 0;
}

// --- exactdist --------------------------------------------------------------

struct ExactArgs {
    std::string pair, table = "ple";
    std::size_t n = 0, a = 0, b = 0;
    long max_offset = 20;
    std::size_t horizon = tcd::kDefaultHorizon;
    double step = 0.0;
};

int run_exactdist(const ExactArgs& a) {
    const auto pair = tcd::pair_from_json(tcd::read_json_file(a.pair));
    tcd::LatticeOptions lo;
    lo.step = a.step;
    const auto lattice = tcd::lattice_llr_pair(pair, lo);
    std::cout.precision(17);
    if (a.table == "ple") {
        tcd::require(a.a < a.b && a.b <= a.n, "--a, --b, --n need 0 <= a < b <= n");
        if (!lattice.exact) std::cerr << "note: LLR laws binned on a lattice of step " << lattice.step() << "\n";
        std::cout << "l,r,case,p_lr\n";
        const long A = static_cast<long>(a.a), B = static_cast<long>(a.b), N = static_cast<long>(a.n);
        for (long l = -A; A + l < N; ++l)
            for (long r = A + l + 1 - B; B + r <= N; ++r)
                std::cout << l << ',' << r << ',' << tcd::ple_case(l, r, B - A) << ','
                          << tcd::ple_joint_probability(l, r, a.a, a.b, a.n, lattice) << '\n';
        return 0;
    }
    tcd::require(a.table == "pmf", "--table must be ple or pmf");
    tcd::require(a.max_offset >= 0, "--max-offset must be nonnegative");
    const tcd::AsymptoticPmf pmf(lattice, a.horizon);
    std::cout << "offset,p_r,q_l,bracket_p,bracket_q\n";
    for (long o = -a.max_offset; o <= a.max_offset; ++o) {
        const auto qa = pmf(o, tcd::PmfSide::a), pb = pmf(o, tcd::PmfSide::b);
        std::cout << o << ',' << pb.value << ',' << qa.value << ',' << pb.bracket << ',' << qa.bracket << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detection and estimation of multiple transient changes"};
    app.require_subcommand(1, 1);

    DetectArgs det;
    auto* detect = app.add_subcommand("detect", "Maximum-likelihood change interval(s) of a series");
    detect->add_option("--series", det.series, "Series CSV, one value per line")->required();
    detect->add_option("--pair", det.pair, "Distribution pair JSON")->required();
    auto* k_opt = detect->add_option("--k", det.k, "Number of intervals (known-K estimator)")->check(CLI::PositiveNumber);
    detect->add_option("--verify", det.verify, "Recheck a previous detect result against the series")->excludes(k_opt);

    MonitorArgs mon;
    auto* monitor = app.add_subcommand("monitor", "Sequential detection of disorders and readjustments");
    monitor->add_option("--series", mon.series)->required();
    monitor->add_option("--pair", mon.pair)->required();
    monitor->add_option("--alpha", mon.alpha, "Familywise false alarm level");
    monitor->add_option("--beta", mon.beta, "Familywise false readjustment level");
    monitor->add_option("--method", mon.cal.method, "exact | mc");
    monitor->add_option("--mc-reps", mon.cal.mc_reps, "Monte Carlo calibration replicates");
    monitor->add_option("--seed", mon.cal.seed, "Seed for Monte Carlo calibration");
    monitor->add_option("--h-alpha", mon.h_alpha, "Override the disorder threshold");
    monitor->add_option("--h-beta", mon.h_beta, "Override the readjustment threshold");
    monitor->add_option("--trace", mon.trace, "Write t,W,W_tilde,regime CSV here");

    GlrArgs glr;
    auto* glr_cmd = app.add_subcommand("glr", "GLR stopping time with estimated parameters");
    glr_cmd->add_option("--series", glr.series)->required();
    glr_cmd->add_option("--family", glr.family, "normal | bernoulli | poisson | exponential");
    glr_cmd->add_option("--omega", glr.omega, "Window exponent in (0, 1)");
    glr_cmd->add_option("--threshold", glr.threshold, "Alarm threshold h")->required();
    glr_cmd->add_option("--theta0", glr.theta0, "Known baseline natural parameter");
    glr_cmd->add_option("--theta1", glr.theta1, "Known post-change natural parameter");

    ThresholdArgs thr;
    auto* threshold = app.add_subcommand("threshold", "False alarm thresholds");
    threshold->add_option("--pair", thr.pair)->required();
    threshold->add_option("--n", thr.n, "Sample length")->required();
    threshold->add_option("--alpha", thr.alpha);
    threshold->add_option("--beta", thr.beta, "Also compute the readjustment threshold");
    threshold->add_option("--method", thr.cal.method, "exact | mc");
    threshold->add_option("--seed", thr.cal.seed);
    threshold->add_option("--mc-reps", thr.cal.mc_reps);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment config");
    simulate->add_option("--config", sim.config, "Experiment JSON")->required();
    simulate->add_option("--seed", sim.seed, "Master seed")->required();
    simulate->add_option("--out-dir", sim.out_dir, "Directory for the JSON and CSV results");

    ExactArgs ex;
    auto* exact = app.add_subcommand("exactdist", "Exact PLE probabilities or the asymptotic error pmf");
    exact->add_option("--pair", ex.pair)->required();
    exact->add_option("--table", ex.table, "ple | pmf");
    exact->add_option("--n", ex.n);
    exact->add_option("--a", ex.a);
    exact->add_option("--b", ex.b);
    exact->add_option("--max-offset", ex.max_offset);
    exact->add_option("--horizon", ex.horizon);
    exact->add_option("--step", ex.step, "Lattice step for binned laws (0 = default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), 2);
    }

    try {
        if (*detect) return run_detect(det);
        if (*monitor) return run_monitor(mon);
        if (*glr_cmd) return run_glr(glr);
        if (*threshold) return run_threshold(thr);
        if (*simulate) return run_simulate(sim);
        if (*exact) return run_exactdist(ex);
    } catch (const tcd::Error& e) {
        return report_error(kind_name(e.kind()), e.what(), exit_code_for(e.kind()));
    } catch (const std::filesystem::filesystem_error& e) {
        return report_error("io", e.what(), 2);
    } catch (const std::bad_alloc&) {
        return report_error("state_explosion", "out of memory", 4);
    }
    return 2;
}
