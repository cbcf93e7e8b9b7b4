#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "unbiasedmc/baseline.hpp"
#include "unbiasedmc/estimator.hpp"
#include "unbiasedmc/model.hpp"
#include "unbiasedmc/unbiased1d.hpp"
#include "unbiasedmc/unbiasednd.hpp"

// Experiment runner: flat key=value config files with section headers,
// sweeps over lambda (unbiased schemes) or step counts (grid schemes),
// and CSV output with a fixed column set.

namespace umc {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    std::string scheme;            // euler | milstein | unbiased-1d | unbiased-nd
    std::string mode = "sweep";    // sweep | trace
    double maturity = 0.0;
    std::vector<double> lambdas;   // unbiased schemes; may be empty (header-only CSV)
    std::vector<int> steps;        // grid schemes
    bool has_lambda = false;
    bool has_steps = false;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
    RecursionVariant variant = RecursionVariant::standard;
    std::vector<std::uint64_t> checkpoints;

    std::string model;             // model key
    std::map<std::string, double> model_params;

    std::string payoff = "put";
    double strike = 0.0;
    double payoff_value = 1.0;

    std::string diagnostics_path;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& v, int line, const std::string& key) {
    try {
        size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "': not a number: '" + v + "'");
    }
}

inline std::vector<std::string> split_ws(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream ss(v);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace detail

/// Parses the flat key=value format.  '#' starts a comment, '[section]'
/// lines group keys, values may be single tokens or whitespace-separated
/// lists.  Unknown sections or keys are errors.
inline ExperimentConfig parse_config(std::istream& in) {
    static const std::map<std::string, std::set<std::string>> known = {
        {"experiment",
         {"scheme", "mode", "T", "lambda", "steps", "paths", "seed", "recursion_variant",
          "checkpoints"}},
        {"model", {"name", "s0", "mu", "sigma", "rate", "beta", "r0", "eps", "x0", "dim", "corr"}},
        {"payoff", {"type", "strike", "value"}},
        {"output", {"diagnostics"}},
    };

    ExperimentConfig cfg;
    std::string section;
    std::string raw;
    int line = 0;
    bool saw_paths = false, saw_seed = false, saw_T = false;

    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (const auto pos = s.find('#'); pos != std::string::npos) s = s.substr(0, pos);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("line " + std::to_string(line) + ": malformed section header");
            section = detail::trim(s.substr(1, s.size() - 2));
            if (!known.count(section))
                throw ConfigError("line " + std::to_string(line) + ": unknown section '" +
                                  section + "'");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string value = detail::trim(s.substr(eq + 1));
        if (section.empty())
            throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                              "' outside any section");
        if (!known.at(section).count(key))
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key +
                              "' in section [" + section + "]");

        if (section == "experiment") {
            if (key == "scheme") cfg.scheme = value;
            else if (key == "mode") cfg.mode = value;
            else if (key == "T") { cfg.maturity = detail::parse_double(value, line, key); saw_T = true; }
            else if (key == "lambda") {
                cfg.has_lambda = true;
                for (const auto& tok : detail::split_ws(value))
                    cfg.lambdas.push_back(detail::parse_double(tok, line, key));
            } else if (key == "steps") {
                cfg.has_steps = true;
                for (const auto& tok : detail::split_ws(value)) {
                    const double v = detail::parse_double(tok, line, key);
                    if (v < 1 || v != static_cast<int>(v))
                        throw ConfigError("line " + std::to_string(line) +
                                          ": key 'steps': not a positive integer: '" + tok + "'");
                    cfg.steps.push_back(static_cast<int>(v));
                }
            } else if (key == "paths") {
                cfg.paths = static_cast<std::uint64_t>(detail::parse_double(value, line, key));
                saw_paths = true;
            } else if (key == "seed") {
                try {
                    cfg.seed = std::stoull(value);
                } catch (const std::exception&) {
                    throw ConfigError("line " + std::to_string(line) +
                                      ": key 'seed': not a 64-bit integer: '" + value + "'");
                }
                saw_seed = true;
            } else if (key == "recursion_variant") {
                if (value == "standard") cfg.variant = RecursionVariant::standard;
                else if (value == "alt") cfg.variant = RecursionVariant::alt;
                else
                    throw ConfigError("line " + std::to_string(line) +
                                      ": recursion_variant must be 'standard' or 'alt'");
            } else if (key == "checkpoints") {
                for (const auto& tok : detail::split_ws(value))
                    cfg.checkpoints.push_back(
                        static_cast<std::uint64_t>(detail::parse_double(tok, line, key)));
            }
        } else if (section == "model") {
            if (key == "name") cfg.model = value;
            else cfg.model_params[key] = detail::parse_double(value, line, key);
        } else if (section == "payoff") {
            if (key == "type") cfg.payoff = value;
            else if (key == "strike") cfg.strike = detail::parse_double(value, line, key);
            else if (key == "value") cfg.payoff_value = detail::parse_double(value, line, key);
        } else if (section == "output") {
            if (key == "diagnostics") cfg.diagnostics_path = value;
        }
    }

    // validation
    static const std::set<std::string> schemes = {"euler", "milstein", "unbiased-1d",
                                                  "unbiased-nd"};
    if (!schemes.count(cfg.scheme))
        throw ConfigError("key 'scheme': expected euler|milstein|unbiased-1d|unbiased-nd, got '" +
                          cfg.scheme + "'");
    if (cfg.mode != "sweep" && cfg.mode != "trace")
        throw ConfigError("key 'mode': expected sweep|trace, got '" + cfg.mode + "'");
    if (!saw_T || cfg.maturity <= 0.0) throw ConfigError("key 'T': required and must be > 0");
    if (!saw_paths || cfg.paths < 1) throw ConfigError("key 'paths': required and must be >= 1");
    if (!saw_seed) throw ConfigError("key 'seed': required");
    const bool unbiased = cfg.scheme == "unbiased-1d" || cfg.scheme == "unbiased-nd";
    if (unbiased && (!cfg.has_lambda || cfg.has_steps))
        throw ConfigError("scheme '" + cfg.scheme +
                          "' requires 'lambda' (and no 'steps') in [experiment]");
    if (!unbiased && (!cfg.has_steps || cfg.has_lambda))
        throw ConfigError("scheme '" + cfg.scheme +
                          "' requires 'steps' (and no 'lambda') in [experiment]");
    for (double l : cfg.lambdas)
        if (!(l > 0.0)) throw ConfigError("key 'lambda': intensities must be > 0");
    if (cfg.variant == RecursionVariant::alt && cfg.scheme != "unbiased-1d")
        throw ConfigError("recursion_variant 'alt' applies to scheme unbiased-1d only");
    if (cfg.mode == "trace") {
        if (cfg.checkpoints.empty()) throw ConfigError("mode 'trace' requires 'checkpoints'");
        for (size_t i = 1; i < cfg.checkpoints.size(); ++i)
            if (cfg.checkpoints[i] <= cfg.checkpoints[i - 1])
                throw ConfigError("key 'checkpoints': must be strictly increasing");
        if (cfg.checkpoints.back() > cfg.paths)
            throw ConfigError("key 'checkpoints': last checkpoint exceeds 'paths'");
        const size_t cells = unbiased ? cfg.lambdas.size() : cfg.steps.size();
        if (cells != 1) throw ConfigError("mode 'trace' requires exactly one sweep cell");
    }
    static const std::set<std::string> models = {"black-scholes", "constant-coeff", "cev",
                                                 "gaussian-rate-1d", "nd-lognormal"};
    if (!models.count(cfg.model))
        throw ConfigError("key 'name' in [model]: unknown model '" + cfg.model + "'");
    if (!cfg.diagnostics_path.empty()) {
        const size_t cells = unbiased ? cfg.lambdas.size() : cfg.steps.size();
        if (cells != 1)
            throw ConfigError("key 'diagnostics': requires exactly one sweep cell");
    }
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
    std::istringstream ss(text);
    return parse_config(ss);
}

// ---------------------------------------------------------------------------
// Model / payoff dispatch
// ---------------------------------------------------------------------------

namespace detail {

inline double param_or(const ExperimentConfig& cfg, const std::string& key, double fallback) {
    const auto it = cfg.model_params.find(key);
    return it == cfg.model_params.end() ? fallback : it->second;
}

inline double required_param(const ExperimentConfig& cfg, const std::string& key) {
    const auto it = cfg.model_params.find(key);
    if (it == cfg.model_params.end())
        throw ConfigError("model '" + cfg.model + "' requires parameter '" + key + "'");
    return it->second;
}

/// Calls fn(model, s0) for the scalar model named by the config.
template <typename Fn>
auto with_scalar_model(const ExperimentConfig& cfg, Fn&& fn) {
    const double s0 = param_or(cfg, "s0", 100.0);
    if (cfg.model == "black-scholes") {
        BlackScholesModel m{required_param(cfg, "mu"), required_param(cfg, "sigma"),
                            param_or(cfg, "rate", 0.0)};
        return fn(m, s0);
    }
    if (cfg.model == "constant-coeff") {
        ConstantCoeffModel m{param_or(cfg, "mu", 0.0), required_param(cfg, "sigma"),
                             param_or(cfg, "rate", 0.0)};
        return fn(m, s0);
    }
    if (cfg.model == "cev") {
        CevModel m{param_or(cfg, "mu", 0.0), required_param(cfg, "sigma"),
                   param_or(cfg, "beta", 0.5), param_or(cfg, "rate", 0.0)};
        return fn(m, s0);
    }
    throw ConfigError("model '" + cfg.model + "' is not usable with a one-dimensional scheme");
}

/// Calls fn(model, x0) for the vector model named by the config.
template <typename Fn>
auto with_vector_model(const ExperimentConfig& cfg, Fn&& fn) {
    if (cfg.model == "gaussian-rate-1d") {
        GaussianRate1DModel m{param_or(cfg, "r0", 0.0), param_or(cfg, "eps", 0.0)};
        return fn(m, std::vector<double>{param_or(cfg, "x0", 0.0)});
    }
    if (cfg.model == "nd-lognormal" || cfg.model == "black-scholes") {
        const int d = cfg.model == "black-scholes"
                          ? 1
                          : static_cast<int>(param_or(cfg, "dim", 1.0));
        if (d < 1) throw ConfigError("model 'nd-lognormal': dim must be >= 1");
        NdLognormalModel m{d, required_param(cfg, "mu"), required_param(cfg, "sigma"),
                           param_or(cfg, "corr", 0.0), param_or(cfg, "rate", 0.0)};
        return fn(m, std::vector<double>(d, param_or(cfg, "s0", 100.0)));
    }
    if (cfg.model == "constant-coeff") {
        const int d = static_cast<int>(param_or(cfg, "dim", 1.0));
        const double s = required_param(cfg, "sigma");
        const double corr = param_or(cfg, "corr", 0.0);
        ConstantCoeffNdModel m;
        m.m.assign(d, param_or(cfg, "mu", 0.0));
        m.c = Matrix(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m.c(i, j) = s * s * (i == j ? 1.0 : corr);
        m.r = param_or(cfg, "rate", 0.0);
        return fn(m, std::vector<double>(d, param_or(cfg, "s0", 0.0)));
    }
    throw ConfigError("model '" + cfg.model + "' is not usable with the multidimensional scheme");
}

inline Payoff1D make_payoff_1d(const ExperimentConfig& cfg) {
    if (cfg.payoff == "put") return put_payoff(cfg.strike);
    if (cfg.payoff == "call") return call_payoff(cfg.strike);
    if (cfg.payoff == "identity") return identity_payoff();
    if (cfg.payoff == "constant") return constant_payoff(cfg.payoff_value);
    throw ConfigError("payoff '" + cfg.payoff + "': expected put|call|identity|constant");
}

inline PayoffND make_payoff_nd(const ExperimentConfig& cfg) {
    if (cfg.payoff == "basket-put" || cfg.payoff == "put")
        return basket_put_payoff(cfg.strike);
    if (cfg.payoff == "constant") return constant_payoff_nd(cfg.payoff_value);
    throw ConfigError("payoff '" + cfg.payoff + "': expected basket-put|put|constant");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sweeps and traces
// ---------------------------------------------------------------------------

struct SweepRow {
    std::string scheme;
    double param = 0.0;
    EstimatorResult result;
    bool failed = false;
    std::string message;
};

struct TraceRow {
    std::uint64_t paths = 0;
    double mean = 0.0;
    double std_error = 0.0;
    double ci99_half_width = 0.0;
};

namespace detail {

/// Runs one sweep cell.  Cell seeds are offset by the cell index so cells are
/// statistically independent.
inline EstimatorResult run_cell(const ExperimentConfig& cfg, double param, std::uint64_t cell,
                                int threads, std::vector<PathDiag>* diag = nullptr) {
    RunOptions opts;
    opts.threads = threads;
    opts.diagnostics = diag;
    const std::uint64_t cell_seed = cfg.seed + cell;
    if (cfg.scheme == "unbiased-1d") {
        const Payoff1D payoff = make_payoff_1d(cfg);
        return with_scalar_model(cfg, [&](const auto& model, double s0) {
            return price_1d(model, payoff.h, s0, cfg.maturity, param, cfg.paths, cell_seed,
                            cfg.variant, opts);
        });
    }
    if (cfg.scheme == "unbiased-nd") {
        const PayoffND payoff = make_payoff_nd(cfg);
        return with_vector_model(cfg, [&](const auto& model, const std::vector<double>& x0) {
            return price_nd(model, payoff.h, x0, cfg.maturity, param, cfg.paths, cell_seed,
                            opts);
        });
    }
    const BaselineScheme scheme =
        cfg.scheme == "euler" ? BaselineScheme::euler : BaselineScheme::milstein;
    const Payoff1D payoff = make_payoff_1d(cfg);
    return with_scalar_model(cfg, [&](const auto& model, double s0) {
        return price_baseline(scheme, model, payoff.h, s0, cfg.maturity,
                              static_cast<int>(param), cfg.paths, cell_seed, opts);
    });
}

}  // namespace detail

/// One row per sweep cell; engine failures become error rows and the sweep
/// continues.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int threads = 0,
                                       std::vector<PathDiag>* diag = nullptr) {
    std::vector<SweepRow> rows;
    std::vector<double> params;
    if (cfg.scheme == "unbiased-1d" || cfg.scheme == "unbiased-nd")
        params = cfg.lambdas;
    else
        for (int n : cfg.steps) params.push_back(n);
    for (std::uint64_t i = 0; i < params.size(); ++i) {
        SweepRow row;
        row.scheme = cfg.scheme;
        row.param = params[i];
        try {
            row.result = detail::run_cell(cfg, params[i], i, threads, diag);
            row.result.n_paths = cfg.paths;
        } catch (const std::exception& e) {
            row.failed = true;
            row.message = e.what();
            const double nan = std::nan("");
            row.result.mean = row.result.std_error = row.result.variance =
                row.result.ci99_half_width = nan;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Running estimate at each checkpoint, single pass over per-path
/// contributions (deterministic: contributions depend only on path index).
inline std::vector<TraceRow> convergence_trace(const ExperimentConfig& cfg, int threads = 0) {
    std::vector<PathDiag> diag;
    const double param = cfg.lambdas.empty() ? static_cast<double>(cfg.steps.at(0))
                                             : cfg.lambdas.at(0);
    detail::run_cell(cfg, param, 0, threads, &diag);
    std::vector<TraceRow> rows;
    double sum = 0.0, sum_sq = 0.0;
    size_t next = 0;
    for (std::uint64_t i = 0; i < diag.size() && next < cfg.checkpoints.size(); ++i) {
        const double v = diag[i].p_t * diag[i].discount;
        sum += v;
        sum_sq += v * v;
        if (i + 1 == cfg.checkpoints[next]) {
            TraceRow row;
            row.paths = i + 1;
            const double n = static_cast<double>(row.paths);
            row.mean = sum / n;
            if (row.paths > 1) {
                const double var = std::max(0.0, (sum_sq - n * row.mean * row.mean) / (n - 1.0));
                row.std_error = std::sqrt(var / n);
            }
            row.ci99_half_width = 2.576 * row.std_error;
            rows.push_back(row);
            ++next;
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

namespace detail {
inline std::string fmt10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}
}  // namespace detail

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "scheme,param,mean,stderr,ci99,variance,seconds\n";
    for (const auto& row : rows) {
        out << row.scheme << ',' << detail::fmt10(row.param) << ','
            << detail::fmt10(row.result.mean) << ',' << detail::fmt10(row.result.std_error)
            << ',' << detail::fmt10(row.result.ci99_half_width) << ','
            << detail::fmt10(row.result.variance) << ',' << detail::fmt10(row.result.seconds)
            << '\n';
    }
}

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
    out << "paths,mean,stderr,ci99\n";
    for (const auto& row : rows) {
        out << row.paths << ',' << detail::fmt10(row.mean) << ','
            << detail::fmt10(row.std_error) << ',' << detail::fmt10(row.ci99_half_width)
            << '\n';
    }
}

inline void write_diagnostics_csv(std::ostream& out, const std::vector<PathDiag>& diag) {
    out << "path_index,p,P_T,discount\n";
    for (const auto& d : diag)
        out << d.path_index << ',' << d.jumps << ',' << detail::fmt10(d.p_t) << ','
            << detail::fmt10(d.discount) << '\n';
}

}  // namespace umc
