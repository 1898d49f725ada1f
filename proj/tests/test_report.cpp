#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bench.hpp"
#include "screenlab/io.hpp"

using namespace screenlab;
using namespace screenlab::bench;

namespace {

BenchRow row(std::uint64_t seed, const char* strategy, const char* test, double ratio,
             std::uint64_t flops, double time, double screened) {
    BenchRow r;
    r.seed = seed;
    r.algo = "fista";
    r.strategy = strategy;
    r.test = test;
    r.lambda_ratio = ratio;
    r.iters = 10;
    r.flops = flops;
    r.time_s = time;
    r.final_obj = 0.5;
    r.screened_frac = screened;
    return r;
}

}  // namespace

TEST_CASE("percentiles") {
    CHECK(percentile({3.0}, 0.25) == 3.0);
    const Summary s = summarize({2.0, 2.0, 2.0, 2.0});
    CHECK(s.p75 - s.p25 == 0.0);
    CHECK(percentile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(percentile({4, 1, 3, 2}, 0.25) == 1.75);
    CHECK_THROWS(percentile({}, 0.5));
    CHECK_THROWS(percentile({1.0}, 1.5));
}

TEST_CASE("aggregation normalizes by the matching none run") {
    const std::vector<BenchRow> rows = {
        row(0, "none", "-", 0.5, 1000, 2.0, 0.0),  row(0, "dynamic", "dst3", 0.5, 250, 1.0, 0.8),
        row(1, "none", "-", 0.5, 2000, 4.0, 0.0),  row(1, "dynamic", "dst3", 0.5, 1000, 1.0, 0.6),
        row(2, "none", "-", 0.5, 1000, 1.0, 0.0),  row(2, "dynamic", "dst3", 0.5, 400, 0.5, 0.7),
    };
    const auto rep = aggregate(rows);
    REQUIRE(rep.size() == 2);
    const ReportRow& d = rep[0];
    CHECK(d.strategy == "dynamic");
    CHECK(d.count == 3);
    CHECK(d.flops.median == doctest::Approx(0.4));
    CHECK(d.flops.p25 == doctest::Approx(0.325));
    CHECK(d.time.median == doctest::Approx(0.5));
    CHECK(d.screened_frac.median == doctest::Approx(0.7));
    CHECK(rep[1].strategy == "none");
    CHECK(rep[1].flops.median == 1.0);

    const std::vector<BenchRow> orphan = {row(5, "static", "safe", 0.5, 10, 1.0, 0.1)};
    CHECK_THROWS_AS(aggregate(orphan), std::invalid_argument);
}

TEST_CASE("bench CSV round trip") {
    const std::vector<BenchRow> rows = {row(0, "none", "-", 0.1, 10, 0.25, 0.0),
                                        row(0, "static", "safe", 0.1, 8, 0.125, 0.5)};
    const auto path = std::filesystem::temp_directory_path() / "screenlab_bench_test.csv";
    {
        std::ofstream os(path);
        write_bench_csv(os, rows, "seed=0");
    }
    const auto back = read_bench_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1].strategy == "static");
    CHECK(back[1].lambda_ratio == 0.1);
    CHECK(back[1].flops == 8);
    {
        std::ofstream os(path);
        os << kBenchHeader << "\n0,fista,none,-,0.1,1\n";
    }
    CHECK_THROWS_AS(read_bench_csv(path), io::FormatError);
}

TEST_CASE("bench plans") {
    BenchPlan plan;
    plan.gen.n = 8;
    plan.gen.k = 16;
    plan.lambda_ratios = {0.5};
    plan.algorithms = {Algorithm::Ista};
    plan.strategies = {Strategy::Dynamic};
    plan.tests = {TestKind::Safe};
    plan.seeds = {3};
    plan.repeats = 4;
    const auto rows = run_bench(plan);
    CHECK(rows.size() == 4);
    for (const auto& r : rows) CHECK(r.final_obj == rows[0].final_obj);

    plan.tests = {TestKind::GroupSafe};
    CHECK_THROWS(run_bench(plan));
    plan.tests = {};
    CHECK_THROWS(plan.validate());

    const BenchPlan desk = desk_preset(ProblemKind::Lasso);
    CHECK(desk.gen.n == 200);
    CHECK(desk.gen.k == 1000);
    CHECK(desk.seeds.size() == 30);
    CHECK(desk.lambda_ratios.size() == 9);
    CHECK(desk.max_iters == 200);
    CHECK(desk.rel_tol == 1e-7);
    CHECK_NOTHROW(desk.validate());
    CHECK_NOTHROW(desk_preset(ProblemKind::GroupLasso).validate());
}

TEST_CASE("parallel bench gives the same rows as the serial one") {
    BenchPlan plan;
    plan.gen.n = 10;
    plan.gen.k = 30;
    plan.lambda_ratios = {0.3, 0.7};
    plan.algorithms = {Algorithm::Fista, Algorithm::Sparsa};
    plan.strategies = {Strategy::None, Strategy::Dynamic};
    plan.tests = {TestKind::Safe, TestKind::Dome};
    plan.seeds = {0, 1};
    const auto serial = run_bench(plan);
    plan.parallel = true;
    const auto par = run_bench(plan);
    REQUIRE(serial.size() == par.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].strategy == par[i].strategy);
        CHECK(serial[i].flops == par[i].flops);
        CHECK(serial[i].final_obj == par[i].final_obj);
    }
}

TEST_CASE("SVG output") {
    const std::vector<BenchRow> rows = {row(0, "none", "-", 0.5, 10, 1.0, 0.0),
                                        row(0, "dynamic", "dst3", 0.5, 5, 0.5, 0.5)};
    std::ostringstream os;
    write_svg(os, aggregate(rows), "t");
    const std::string s = os.str();
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("fista dynamic dst3") != std::string::npos);
    CHECK(s.find("</svg>") != std::string::npos);
}
