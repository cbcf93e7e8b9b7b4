// Benchmark CLI: runs one experiment config (sweep or convergence trace) and
// writes the result table as CSV.
//
// Exit codes: 0 success, 2 config error, 3 engine error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "unbiasedmc/harness.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_path, int threads) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open config file '" << config_path << "'\n";
        return 2;
    }
    umc::ExperimentConfig cfg;
    try {
        cfg = umc::parse_config(in);
    } catch (const umc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        out_file.open(out_path);
        if (!out_file) {
            std::cerr << "error: cannot open output file '" << out_path << "'\n";
            return 2;
        }
        out = &out_file;
    }

    int status = 0;
    try {
        if (cfg.mode == "trace") {
            const auto rows = umc::convergence_trace(cfg, threads);
            umc::write_trace_csv(*out, rows);
        } else {
            std::vector<umc::PathDiag> diag;
            const bool want_diag = !cfg.diagnostics_path.empty();
            const auto rows = umc::run_sweep(cfg, threads, want_diag ? &diag : nullptr);
            umc::write_sweep_csv(*out, rows);
            for (const auto& row : rows) {
                if (row.failed) {
                    std::cerr << "engine error in cell param=" << row.param << ": "
                              << row.message << "\n";
                    status = 3;
                }
            }
            if (want_diag && status == 0) {
                std::ofstream diag_out(cfg.diagnostics_path);
                if (!diag_out) {
                    std::cerr << "error: cannot open diagnostics file '"
                              << cfg.diagnostics_path << "'\n";
                    return 2;
                }
                umc::write_diagnostics_csv(diag_out, diag);
            }
        }
    } catch (const umc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "engine error: " << e.what() << "\n";
        return 3;
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unbiased Monte Carlo benchmark runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    int threads = 0;

    CLI::App* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("--config", config_path, "config file (key = value with [sections])")
        ->required();
    run->add_option("--out", out_path, "output CSV path (default: stdout)");
    run->add_option("--threads", threads,
                    "worker thread count (default: UNBIASEDMC_THREADS or all cores)");

    CLI11_PARSE(app, argc, argv);
    return run_command(config_path, out_path, threads);
}
