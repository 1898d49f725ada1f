#pragma once

// Benchmark plans, bench CSV rows and their aggregation into report tables.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "screenlab/datagen.hpp"
#include "screenlab/instrument.hpp"
#include "screenlab/problem.hpp"
#include "screenlab/screening.hpp"
#include "screenlab/solvers.hpp"

namespace screenlab::bench {

struct BenchPlan {
    ProblemKind kind = ProblemKind::Lasso;
    GenSpec gen;                          // seed field is overridden per seed
    std::vector<double> lambda_ratios;    // ascending, in (0, 1]
    std::vector<Algorithm> algorithms;
    std::vector<Strategy> strategies;
    std::vector<TestKind> tests;
    std::vector<std::uint64_t> seeds;
    std::size_t repeats = 1;
    std::size_t max_iters = 200;
    double rel_tol = 1e-7;
    bool parallel = false;

    /// Throws std::invalid_argument on an inconsistent plan.
    void validate() const;
    /// One line describing every field, for `# config` headers.
    std::string describe() const;
};

/// The `paper-desk` preset: Pnoise N=200 K=1000, 30 seeds, ratios 0.1..0.9,
/// FISTA, all strategies, stopping (200, 1e-7).
BenchPlan desk_preset(ProblemKind kind);

struct BenchRow {
    std::uint64_t seed = 0;
    std::string algo;
    std::string strategy;
    std::string test;  // "-" for strategy none
    double lambda_ratio = 0.0;
    std::size_t iters = 0;
    std::uint64_t flops = 0;
    double time_s = 0.0;
    double final_obj = 0.0;
    double screened_frac = 0.0;
};

inline constexpr const char* kBenchHeader =
    "seed,algo,strategy,test,lambda_ratio,iters,flops,time_s,final_obj,screened_frac";

/// Runs every (seed, ratio, algorithm, strategy, test, repeat) cell. Rows come
/// back sorted by that key regardless of execution order.
std::vector<BenchRow> run_bench(const BenchPlan& plan);

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows,
                     const std::string& config);
/// Throws screenlab::io::FormatError on malformed input.
std::vector<BenchRow> read_bench_csv(const std::filesystem::path& path);

/// Linear interpolation between order statistics; q in [0, 1].
double percentile(std::vector<double> values, double q);

struct Summary {
    double median = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
};

Summary summarize(const std::vector<double>& values);

struct ReportRow {
    std::string algo;
    std::string strategy;
    std::string test;
    double lambda_ratio = 0.0;
    std::size_t count = 0;
    Summary flops;          // flops / flops of the matching none run
    Summary time;           // time / time of the matching none run
    Summary screened_frac;  // raw screened fraction
};

/// Normalizes every row by the none run with the same (seed, algo, ratio) and
/// occurrence index, then aggregates per (algo, strategy, test, ratio).
/// Throws std::invalid_argument when a baseline is missing.
std::vector<ReportRow> aggregate(const std::vector<BenchRow>& rows);

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows,
                      const std::string& config);

/// Line chart of the median normalized flops against lambda/lambda*, one
/// series per (algo, strategy, test), with the 25-75% band shaded.
void write_svg(std::ostream& os, const std::vector<ReportRow>& rows, const std::string& title);

}  // namespace screenlab::bench
