#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "unbiasedmc/harness.hpp"

namespace {

const std::string kBsSweep = R"(
# reference put, small paths for test speed
[experiment]
scheme = unbiased-1d
T = 1.0
lambda = 0.5 1
paths = 20000
seed = 7

[model]
name = black-scholes
s0 = 100
mu = 0.05
sigma = 0.5
rate = 0.05

[payoff]
type = put
strike = 80
)";

std::string strip_seconds_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        out += line.substr(0, pos);
        out += '\n';
    }
    return out;
}

}  // namespace

TEST(ParseConfig, RoundTripOfAllKeys) {
    const auto cfg = umc::parse_config(kBsSweep);
    EXPECT_EQ(cfg.scheme, "unbiased-1d");
    EXPECT_EQ(cfg.mode, "sweep");
    EXPECT_DOUBLE_EQ(cfg.maturity, 1.0);
    ASSERT_EQ(cfg.lambdas.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.lambdas[1], 1.0);
    EXPECT_EQ(cfg.paths, 20000u);
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.model, "black-scholes");
    EXPECT_DOUBLE_EQ(cfg.model_params.at("sigma"), 0.5);
    EXPECT_EQ(cfg.payoff, "put");
    EXPECT_DOUBLE_EQ(cfg.strike, 80.0);
}

TEST(ParseConfig, ErrorsCarryLineAndKeyContext) {
    try {
        umc::parse_config("[experiment]\nscheme = unbiased-1d\nT = oops\n");
        FAIL() << "expected ConfigError";
    } catch (const umc::ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 3"), std::string::npos);
        EXPECT_NE(msg.find("'T'"), std::string::npos);
    }
}

TEST(ParseConfig, RejectsUnknownKeysAndSections) {
    EXPECT_THROW(umc::parse_config("[experiment]\nbogus = 1\n"), umc::ConfigError);
    EXPECT_THROW(umc::parse_config("[nonsense]\n"), umc::ConfigError);
    EXPECT_THROW(umc::parse_config("orphan = 1\n"), umc::ConfigError);
}

TEST(ParseConfig, SchemeAndSweepParameterMustMatch) {
    // unbiased scheme with steps
    EXPECT_THROW(umc::parse_config(R"(
[experiment]
scheme = unbiased-1d
T = 1
steps = 4
paths = 10
seed = 1
[model]
name = black-scholes
)"),
                 umc::ConfigError);
    // grid scheme with lambda
    EXPECT_THROW(umc::parse_config(R"(
[experiment]
scheme = euler
T = 1
lambda = 1
paths = 10
seed = 1
[model]
name = black-scholes
)"),
                 umc::ConfigError);
}

TEST(ParseConfig, AltVariantOnlyForTheScalarScheme) {
    EXPECT_THROW(umc::parse_config(R"(
[experiment]
scheme = unbiased-nd
T = 1
lambda = 1
paths = 10
seed = 1
recursion_variant = alt
[model]
name = gaussian-rate-1d
)"),
                 umc::ConfigError);
}

TEST(RunSweep, EmptyLambdaListGivesHeaderOnlyCsv) {
    auto cfg = umc::parse_config(kBsSweep);
    cfg.lambdas.clear();
    const auto rows = umc::run_sweep(cfg, 2);
    EXPECT_TRUE(rows.empty());
    std::ostringstream out;
    umc::write_sweep_csv(out, rows);
    EXPECT_EQ(out.str(), "scheme,param,mean,stderr,ci99,variance,seconds\n");
}

TEST(RunSweep, CsvIsByteIdenticalAcrossRerunsAndThreadCounts) {
    const auto cfg = umc::parse_config(kBsSweep);
    std::ostringstream a, b, c;
    umc::write_sweep_csv(a, umc::run_sweep(cfg, 1));
    umc::write_sweep_csv(b, umc::run_sweep(cfg, 4));
    umc::write_sweep_csv(c, umc::run_sweep(cfg, 4));
    EXPECT_EQ(strip_seconds_column(a.str()), strip_seconds_column(b.str()));
    EXPECT_EQ(strip_seconds_column(b.str()), strip_seconds_column(c.str()));
}

TEST(RunSweep, RowsCoverEverySchemeKey) {
    for (const std::string scheme : {"euler", "milstein"}) {
        auto cfg = umc::parse_config(kBsSweep);
        cfg.scheme = scheme;
        cfg.has_lambda = false;
        cfg.lambdas.clear();
        cfg.has_steps = true;
        cfg.steps = {2, 4};
        const auto rows = umc::run_sweep(cfg, 2);
        ASSERT_EQ(rows.size(), 2u);
        EXPECT_EQ(rows[0].scheme, scheme);
        EXPECT_DOUBLE_EQ(rows[0].param, 2.0);
        EXPECT_FALSE(rows[0].failed);
        EXPECT_GT(rows[0].result.std_error, 0.0);
    }
}

TEST(RunSweep, VectorSchemeModelsDispatch) {
    const std::string bond = R"(
[experiment]
scheme = unbiased-nd
T = 2.0
lambda = 2
paths = 20000
seed = 3
[model]
name = gaussian-rate-1d
r0 = 0.03
eps = 0.1
x0 = 0.0
[payoff]
type = constant
value = 1
)";
    const auto rows = umc::run_sweep(umc::parse_config(bond), 2);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0].result.mean, umc::gaussian_rate_bond_oracle(0.03, 0.1, 2.0),
                5.0 * rows[0].result.std_error);
}

TEST(RunSweep, CellFailureBecomesAnErrorRowAndSweepContinues) {
    // nd-lognormal pushed to an invalid state: dim 2 with corr 1 makes the
    // covariance singular
    const std::string bad = R"(
[experiment]
scheme = unbiased-nd
T = 1.0
lambda = 1 2
paths = 100
seed = 3
[model]
name = nd-lognormal
dim = 2
mu = 0.05
sigma = 0.5
corr = 1.0
s0 = 100
[payoff]
type = basket-put
strike = 80
)";
    const auto rows = umc::run_sweep(umc::parse_config(bad), 1);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(rows[0].failed);
    EXPECT_TRUE(rows[1].failed);
    EXPECT_FALSE(rows[0].message.empty());
    std::ostringstream out;
    umc::write_sweep_csv(out, rows);
    EXPECT_NE(out.str().find("nan"), std::string::npos);
}

TEST(ConvergenceTrace, RunningEstimateIsDeterministicAndConverges) {
    std::string trace = kBsSweep;
    trace.replace(trace.find("lambda = 0.5 1"), 14, "lambda = 3");
    trace += "\n[experiment]\nmode = trace\ncheckpoints = 100 1000 10000 20000\n";
    const auto cfg = umc::parse_config(trace);
    const auto rows = umc::convergence_trace(cfg, 3);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].paths, 100u);
    EXPECT_EQ(rows[3].paths, 20000u);
    // final row consistent with the closed form at a loose tolerance
    EXPECT_NEAR(rows[3].mean, 7.8909, 5.0 * rows[3].std_error);
    // stderr shrinks roughly like 1/sqrt(n)
    EXPECT_LT(rows[3].std_error, rows[0].std_error);

    const auto rows2 = umc::convergence_trace(cfg, 1);
    for (size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].mean, rows2[i].mean);
        EXPECT_EQ(rows[i].std_error, rows2[i].std_error);
    }
    std::ostringstream out;
    umc::write_trace_csv(out, rows);
    EXPECT_EQ(out.str().substr(0, 22), "paths,mean,stderr,ci99");
}

TEST(ConvergenceTrace, CoarseEulerTraceConvergesToABiasedValue) {
    const std::string euler_trace = R"(
[experiment]
scheme = euler
mode = trace
T = 1.0
steps = 4
paths = 50000
seed = 11
checkpoints = 1000 10000 50000
[model]
name = black-scholes
s0 = 100
mu = 0.05
sigma = 0.5
rate = 0.05
[payoff]
type = put
strike = 80
)";
    const auto rows = umc::convergence_trace(umc::parse_config(euler_trace), 2);
    const double offset = rows.back().mean - 7.8909;
    EXPECT_GT(offset, 0.4);
    EXPECT_LT(offset, 1.2);
}

TEST(Diagnostics, CsvHasTheDocumentedColumns) {
    auto cfg = umc::parse_config(kBsSweep);
    cfg.lambdas = {1.0};
    cfg.paths = 50;
    std::vector<umc::PathDiag> diag;
    umc::run_sweep(cfg, 1, &diag);
    ASSERT_EQ(diag.size(), 50u);
    std::ostringstream out;
    umc::write_diagnostics_csv(out, diag);
    EXPECT_EQ(out.str().substr(0, 25), "path_index,p,P_T,discount");
}

TEST(ThreadCount, EnvironmentVariableIsHonored) {
    ::setenv("UNBIASEDMC_THREADS", "3", 1);
    EXPECT_EQ(umc::resolve_thread_count(0), 3);
    EXPECT_EQ(umc::resolve_thread_count(5), 5);  // explicit wins
    ::unsetenv("UNBIASEDMC_THREADS");
    EXPECT_GE(umc::resolve_thread_count(0), 1);
}
