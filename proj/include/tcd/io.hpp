#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tcd/error.hpp"
#include "tcd/harness.hpp"
#include "tcd/model.hpp"
#include "tcd/multi.hpp"
#include "tcd/single.hpp"

namespace tcd {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// CSV series: one value per line, optional single header line "x", dot decimals.

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw Error(ErrorKind::invalid_argument, "malformed number '" + std::string(s) + "'");
    return v;
}

inline std::vector<double> read_series_csv(std::istream& in) {
    std::vector<double> out;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s(line);
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        if (s.empty()) continue;
        if (first && s == "x") {
            first = false;
            continue;
        }
        first = false;
        try {
            out.push_back(parse_double(s));
        } catch (const Error&) {
            throw Error(ErrorKind::invalid_argument, "line " + std::to_string(lineno) + ": malformed number '" + std::string(s) + "'");
        }
    }
    if (out.empty()) throw Error(ErrorKind::invalid_argument, "series is empty");
    return out;
}

inline std::vector<double> read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::invalid_argument, "cannot open series file " + path);
    return read_series_csv(in);
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::invalid_argument, "cannot open JSON file " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_argument, "malformed JSON in " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Model documents.

inline json to_json(const DensitySpec& d) {
    json j{{"kind", to_string(d.kind)}};
    switch (d.kind) {
        case DensityKind::normal: j["mean"] = d.mean; j["sd"] = d.sd; break;
        case DensityKind::bernoulli: j["p"] = d.p; break;
        case DensityKind::poisson:
        case DensityKind::exponential: j["rate"] = d.rate; break;
        case DensityKind::lattice: j["support"] = d.support; j["masses"] = d.masses; break;
    }
    return j;
}

namespace detail {

template <class T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::invalid_argument, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::invalid_argument, std::string("field '") + key + "' has the wrong type");
    }
}

template <class T>
std::optional<T> optional_field(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return field<T>(j, key);
}

}  // namespace detail

inline DensitySpec density_from_json(const json& j) {
    const auto kind = detail::field<std::string>(j, "kind");
    if (kind == "normal") return DensitySpec::normal(detail::field<double>(j, "mean"), j.value("sd", 1.0));
    if (kind == "bernoulli") return DensitySpec::bernoulli(detail::field<double>(j, "p"));
    if (kind == "poisson") return DensitySpec::poisson(detail::field<double>(j, "rate"));
    if (kind == "exponential") return DensitySpec::exponential(detail::field<double>(j, "rate"));
    if (kind == "lattice")
        return DensitySpec::lattice(detail::field<std::vector<double>>(j, "support"),
                                    detail::field<std::vector<double>>(j, "masses"));
    throw Error(ErrorKind::invalid_argument, "unknown density kind '" + kind + "'");
}

inline json to_json(const DistributionPair& p) { return json{{"base", to_json(p.base)}, {"change", to_json(p.change)}}; }

inline DistributionPair pair_from_json(const json& j) {
    if (!j.is_object() || !j.contains("base") || !j.contains("change"))
        throw Error(ErrorKind::invalid_argument, "pair document needs 'base' and 'change'");
    return DistributionPair(density_from_json(j.at("base")), density_from_json(j.at("change")));
}

inline json to_json(const ChangeScenario& s) {
    json iv = json::array();
    for (auto [a, b] : s.intervals) iv.push_back({a, b});
    return json{{"n", s.n}, {"intervals", iv}};
}

inline ChangeScenario scenario_from_json(const json& j) {
    std::vector<std::pair<std::size_t, std::size_t>> iv;
    if (j.contains("intervals"))
        for (const auto& e : j.at("intervals")) {
            if (!e.is_array() || e.size() != 2) throw Error(ErrorKind::invalid_argument, "interval must be [a, b]");
            iv.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
        }
    return ChangeScenario(detail::field<std::size_t>(j, "n"), iv);
}

// ---------------------------------------------------------------------------
// Result documents.

inline json to_json(const IntervalEstimate& e) {
    return json{{"schema_version", kSchemaVersion}, {"a_hat", e.a_hat}, {"b_hat", e.b_hat}, {"lambda", e.lambda}, {"no_change", e.no_change}};
}

inline json to_json(const MultiIntervalEstimate& m) {
    json iv = json::array();
    for (auto [a, b] : m.intervals) iv.push_back({{"a_hat", a}, {"b_hat", b}});
    return json{{"schema_version", kSchemaVersion}, {"intervals", iv}, {"total_gain", m.total_gain}, {"saturated", m.saturated}};
}

inline json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const DetectionReport& r) {
    json ev = json::array();
    for (const auto& e : r.events)
        ev.push_back({{"k", e.k}, {"tau", e.tau}, {"a_hat", e.a_hat}, {"tau_tilde", optional_json(e.tau_tilde)}, {"b_hat", optional_json(e.b_hat)}});
    return json{{"schema_version", kSchemaVersion}, {"events", ev}, {"k_hat", r.k_hat()}};
}

inline json to_json(const ThresholdSpec& t) {
    return json{{"schema_version", kSchemaVersion},
                {"alpha", t.alpha},
                {"h", t.h},
                {"moment", t.moment},
                {"method", to_string(t.method)},
                {"standard_error", t.standard_error},
                {"replicates", t.replicates},
                {"conservative", t.conservative},
                {"n", t.n}};
}

inline json to_json(const DetectorConfig& c) {
    return json{{"schema_version", kSchemaVersion},
                {"alpha", c.alpha},
                {"beta", c.beta},
                {"h_alpha", c.h_alpha},
                {"h_beta_tilde", c.h_beta_tilde},
                {"moment_alpha", c.moment_alpha},
                {"moment_beta", c.moment_beta},
                {"method", to_string(c.method)},
                {"n", c.n}};
}

inline ThresholdMethod method_from_string(const std::string& s) {
    if (s == "exact" || s == "exact-lattice") return ThresholdMethod::exact_lattice;
    if (s == "mc" || s == "monte-carlo") return ThresholdMethod::monte_carlo;
    throw Error(ErrorKind::invalid_argument, "unknown threshold method '" + s + "'");
}

inline FamilyKind family_from_string(const std::string& s) {
    if (s == "normal") return FamilyKind::normal_unit_variance;
    if (s == "bernoulli") return FamilyKind::bernoulli;
    if (s == "poisson") return FamilyKind::poisson;
    if (s == "exponential") return FamilyKind::exponential;
    throw Error(ErrorKind::invalid_argument, "unknown family '" + s + "'");
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (auto k : {ExperimentKind::level, ExperimentKind::far, ExperimentKind::frr, ExperimentKind::mle_error,
                   ExperimentKind::glr_fa, ExperimentKind::asymptotic_pmf})
        if (s == to_string(k)) return k;
    throw Error(ErrorKind::invalid_argument, "unknown experiment kind '" + s + "'");
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const ExperimentConfig& c) {
    return json{{"kind", to_string(c.kind)},
                {"scenario", to_json(c.scenario)},
                {"pair", to_json(c.pair)},
                {"replicates", c.replicates},
                {"seed", c.seed},
                {"alpha", c.alpha},
                {"beta", c.beta},
                {"method", c.method ? json(to_string(*c.method)) : json(nullptr)},
                {"threshold_replicates", c.threshold_replicates},
                {"conservative", c.conservative},
                {"h_alpha", optional_json(c.h_alpha)},
                {"h_beta", optional_json(c.h_beta)},
                {"family", to_string(c.family)},
                {"omega", c.omega},
                {"theta0", optional_json(c.theta0)},
                {"glr_threshold", optional_json(c.glr_threshold)},
                {"glr_window", c.glr_window},
                {"max_offset", c.max_offset},
                {"horizon", c.horizon},
                {"lattice_step", c.lattice_step}};
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        c.kind = experiment_kind_from_string(detail::field<std::string>(j, "kind"));
        c.scenario = scenario_from_json(j.at("scenario"));
        c.pair = pair_from_json(j.at("pair"));
        c.replicates = j.value("replicates", c.replicates);
        c.seed = j.value("seed", c.seed);
        c.alpha = j.value("alpha", c.alpha);
        c.beta = j.value("beta", c.beta);
        if (auto m = detail::optional_field<std::string>(j, "method")) c.method = method_from_string(*m);
        c.threshold_replicates = j.value("threshold_replicates", c.threshold_replicates);
        c.conservative = j.value("conservative", c.conservative);
        c.h_alpha = detail::optional_field<double>(j, "h_alpha");
        c.h_beta = detail::optional_field<double>(j, "h_beta");
        if (auto f = detail::optional_field<std::string>(j, "family")) c.family = family_from_string(*f);
        c.omega = j.value("omega", c.omega);
        c.theta0 = detail::optional_field<double>(j, "theta0");
        c.glr_threshold = detail::optional_field<double>(j, "glr_threshold");
        c.glr_window = j.value("glr_window", c.glr_window);
        c.max_offset = j.value("max_offset", c.max_offset);
        c.horizon = j.value("horizon", c.horizon);
        c.lattice_step = j.value("lattice_step", c.lattice_step);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_argument, std::string("malformed experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

inline json to_json(const ExperimentResult& r) {
    json est = json::array();
    for (const auto& e : r.estimates)
        est.push_back({{"name", e.name}, {"value", e.value}, {"standard_error", e.standard_error}, {"replicates", e.replicates}});
    json pmf = json::array();
    for (const auto& p : r.pmf)
        pmf.push_back({{"offset", p.offset}, {"p_a", p.p_a}, {"se_a", p.se_a}, {"p_b", p.p_b}, {"se_b", p.se_b},
                       {"bracket_a", p.bracket_a}, {"bracket_b", p.bracket_b}});
    return json{{"schema_version", kSchemaVersion},
                {"config", to_json(r.config)},
                {"estimates", est},
                {"pmf", pmf},
                {"h_alpha", r.h_alpha},
                {"h_beta_tilde", r.h_beta_tilde},
                {"wall_time_seconds", r.wall_time_seconds}};
}

inline ExperimentResult experiment_result_from_json(const json& j) {
    ExperimentResult r;
    r.config = experiment_config_from_json(j.at("config"));
    for (const auto& e : j.at("estimates"))
        r.estimates.push_back(Estimate{e.at("name").get<std::string>(), e.at("value").get<double>(),
                                       e.at("standard_error").get<double>(), e.at("replicates").get<std::size_t>()});
    for (const auto& p : j.at("pmf"))
        r.pmf.push_back(PmfRow{p.at("offset").get<long>(), p.at("p_a").get<double>(), p.at("se_a").get<double>(),
                               p.at("p_b").get<double>(), p.at("se_b").get<double>(), p.at("bracket_a").get<double>(),
                               p.at("bracket_b").get<double>()});
    r.h_alpha = j.at("h_alpha").get<double>();
    r.h_beta_tilde = j.at("h_beta_tilde").get<double>();
    r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    return r;
}

// ---------------------------------------------------------------------------
// Exports.

enum class ExportFormat { csv, json };

/// CSV columns: offset,p_a,se_a,p_b,se_b,bracket_a,bracket_b (one row per pmf offset).
inline void write_results_csv(std::ostream& os, const ExperimentResult& r) {
    os << "offset,p_a,se_a,p_b,se_b,bracket_a,bracket_b\n";
    os.precision(17);
    for (const auto& p : r.pmf)
        os << p.offset << ',' << p.p_a << ',' << p.se_a << ',' << p.p_b << ',' << p.se_b << ',' << p.bracket_a << ','
           << p.bracket_b << '\n';
}

inline void export_results(const ExperimentResult& r, const std::string& path, ExportFormat format) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::invalid_argument, "cannot write " + path);
    if (format == ExportFormat::json) {
        out << to_json(r).dump(2) << '\n';
    } else {
        write_results_csv(out, r);
    }
    if (!out) throw Error(ErrorKind::invalid_argument, "failed writing " + path);
}

/// Monitor trace CSV: t,W,W_tilde,regime (inactive statistic left empty).
inline void write_detection_trace_csv(std::ostream& os, const DetectionTrace& trace) {
    os << "t,W,W_tilde,regime\n";
    os.precision(17);
    for (std::size_t t = 0; t < trace.w.size(); ++t) {
        os << t << ',';
        if (!std::isnan(trace.w[t])) os << trace.w[t];
        os << ',';
        if (!std::isnan(trace.w_tilde[t])) os << trace.w_tilde[t];
        os << ',' << (trace.regime[t] == Regime::in_control ? "in-control" : "out-of-control") << '\n';
    }
}

}  // namespace tcd
