#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "bench.hpp"
#include "screenlab/datagen.hpp"
#include "screenlab/io.hpp"
#include "screenlab/kernels.hpp"
#include "screenlab/problem.hpp"
#include "screenlab/solvers.hpp"

namespace sl = screenlab;

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SCREENLAB_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("SCREENLAB_SEED is not an integer: ") + env);
        }
    }
    return 0;
}

template <typename T, typename Parse>
T parse_or_throw(const std::string& value, Parse&& parse, const char* what) {
    if (auto v = parse(value)) return *v;
    throw std::invalid_argument(std::string("unknown ") + what + " '" + value + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::vector<std::string>& values, Parse&& parse, const char* what) {
    std::vector<T> out;
    for (const auto& v : values) out.push_back(parse_or_throw<T>(v, parse, what));
    return out;
}

std::string command_line(int argc, char** argv) {
    std::ostringstream os;
    os << "screenlab";
    for (int i = 1; i < argc; ++i) os << ' ' << argv[i];
    return os.str();
}

std::filesystem::path sibling(const std::filesystem::path& p, const std::string& suffix) {
    std::filesystem::path out = p;
    out.replace_extension();
    out += suffix;
    return out;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
    std::string kind = "gaussian";
    std::string obs;
    std::size_t n = 0;
    std::size_t k = 0;
    std::optional<std::uint64_t> seed;
    std::size_t group_size = 0;
    double p = 0.05;
    double snr_db = 20.0;
    double pnoise_scale = 0.1;
    std::string out;
    std::string obs_out;
    std::string groups_out;
    std::string truth_out;
    std::string manifest;
};

int cmd_gen(const GenArgs& a) {
    sl::GenSpec spec;
    spec.dict = parse_or_throw<sl::DictKind>(a.kind, sl::parse_dict_kind, "dictionary kind");
    const std::string obs_name =
        !a.obs.empty() ? a.obs : (spec.dict == sl::DictKind::Dct ? "unit-sphere" : "atom-like");
    spec.obs = parse_or_throw<sl::ObsKind>(obs_name, sl::parse_obs_kind, "observation kind");
    spec.n = a.n;
    spec.k = a.k;
    spec.seed = a.seed ? *a.seed : default_seed();
    spec.group_size = a.group_size;
    spec.bernoulli_p = a.p;
    spec.snr_db = a.snr_db;
    spec.pnoise_scale = a.pnoise_scale;
    spec.validate();
    if (spec.obs == sl::ObsKind::BernoulliGaussian && spec.group_size == 0)
        throw std::invalid_argument("bernoulli-gaussian observations need --group-size");

    const std::filesystem::path dict_path = a.out;
    const auto obs_path = a.obs_out.empty() ? sibling(dict_path, ".y.dsmx")
                                            : std::filesystem::path(a.obs_out);
    const auto manifest_path = a.manifest.empty() ? sibling(dict_path, ".json")
                                                  : std::filesystem::path(a.manifest);

    const sl::Dictionary d = sl::gen_dictionary(spec);
    std::optional<sl::GroupPartition> part;
    if (spec.group_size > 0) part = sl::gen_partition(d, spec.group_size, spec.seed);
    const sl::Observation obs = sl::gen_observation(spec, d, part ? &*part : nullptr);

    nlohmann::ordered_json m;
    m["generator"] = "screenlab gen";
    m["rng"] = "xoshiro256** seeded by splitmix64";
    m["seed"] = spec.seed;
    m["dictionary_kind"] = sl::to_string(spec.dict);
    m["observation_kind"] = sl::to_string(spec.obs);
    m["n"] = spec.n;
    m["k"] = spec.k;
    m["group_size"] = spec.group_size;
    m["bernoulli_p"] = spec.bernoulli_p;
    m["snr_db"] = spec.snr_db;
    m["pnoise_scale"] = spec.pnoise_scale;
    m["dictionary"] = dict_path.filename().string();
    m["observation"] = obs_path.filename().string();

    sl::io::write_dsmx(dict_path, sl::io::to_matrix(d));
    sl::io::write_dsmx(obs_path, sl::io::to_matrix(obs.y));
    if (part) {
        const auto groups_path = a.groups_out.empty() ? sibling(dict_path, ".groups")
                                                      : std::filesystem::path(a.groups_out);
        std::ostringstream comment;
        comment << "seed=" << spec.seed << " group_size=" << spec.group_size;
        sl::io::write_groups(groups_path, *part, comment.str());
        m["groups"] = groups_path.filename().string();
    }
    if (obs.ground_truth) {
        const auto truth_path = a.truth_out.empty() ? sibling(dict_path, ".x.dsmx")
                                                    : std::filesystem::path(a.truth_out);
        sl::io::write_dsmx(truth_path, sl::io::to_matrix(*obs.ground_truth));
        m["ground_truth"] = truth_path.filename().string();
    }
    std::ofstream mf(manifest_path);
    if (!mf) throw std::runtime_error("cannot write " + manifest_path.string());
    mf << m.dump(2) << '\n';
    std::cout << "wrote " << dict_path.string() << " (" << spec.n << "x" << spec.k << "), "
              << obs_path.string() << ", " << manifest_path.string() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
    std::string dict;
    std::string obs;
    std::string groups;
    std::optional<double> lambda;
    std::optional<double> lambda_ratio;
    std::string algo = "ista";
    std::string strategy = "none";
    std::string test;
    std::size_t max_iters = 200;
    double rel_tol = 1e-7;
    double twist_alpha = 1.78;
    double twist_beta = 1.78;
    double cp_gamma = 0.0;
    std::string trace;
};

int cmd_solve(const SolveArgs& a, const std::string& config) {
    if (a.lambda.has_value() == a.lambda_ratio.has_value())
        throw std::invalid_argument("give exactly one of --lambda and --lambda-ratio");
    auto d = std::make_shared<const sl::Dictionary>(
        sl::io::to_dictionary(sl::io::read_matrix(a.dict)));
    sl::Vector y = sl::io::to_vector(sl::io::read_matrix(a.obs));
    std::shared_ptr<const sl::GroupPartition> part;
    if (!a.groups.empty())
        part = std::make_shared<const sl::GroupPartition>(sl::io::load_partition(a.groups, *d));

    const auto make = [&](double lam) {
        return part ? sl::Problem::group_lasso(d, part, y, lam) : sl::Problem::lasso(d, y, lam);
    };
    const double lambda_star = sl::extreme_dual(make(1.0)).lambda_star;
    const double lam = a.lambda ? *a.lambda : *a.lambda_ratio * lambda_star;
    const sl::Problem p = make(lam);

    sl::SolverConfig cfg;
    cfg.algorithm = parse_or_throw<sl::Algorithm>(a.algo, sl::parse_algorithm, "algorithm");
    cfg.strategy = parse_or_throw<sl::Strategy>(a.strategy, sl::parse_strategy, "strategy");
    if (!a.test.empty())
        cfg.test = parse_or_throw<sl::TestKind>(a.test, sl::parse_test_kind, "test");
    cfg.max_iters = a.max_iters;
    cfg.rel_tol = a.rel_tol;
    cfg.twist_alpha = a.twist_alpha;
    cfg.twist_beta = a.twist_beta;
    cfg.cp_gamma = a.cp_gamma;

    const sl::SolveResult res = sl::run(p, cfg);
    std::cout << std::setprecision(12);
    std::cout << "problem: " << sl::to_string(p.kind()) << '\n'
              << "kernels: " << sl::kernels::active().name << '\n'
              << "lambda_star: " << lambda_star << '\n'
              << "lambda: " << lam << '\n'
              << "iterations: " << res.iterations << '\n'
              << "final_objective: " << res.final_objective << '\n'
              << "flops: " << res.trace.total_flops() << '\n'
              << "time_s: " << res.trace.total_seconds() << '\n'
              << "kept: " << res.screen.kept.size() << " / " << p.k() << '\n'
              << "nonzeros: "
              << std::count_if(res.x_star.begin(), res.x_star.end(),
                               [](double v) { return v != 0.0; })
              << '\n';
    if (!a.trace.empty()) {
        std::ofstream os(a.trace);
        if (!os) throw std::runtime_error("cannot write " + a.trace);
        sl::write_trace_csv(os, res.trace, config);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    std::string preset;
    std::string problem = "lasso";
    std::string kind;
    std::string obs;
    std::optional<std::size_t> n, k, group_size, seeds, repeats, max_iters;
    std::optional<std::uint64_t> seed;
    std::vector<double> ratios;
    std::vector<std::string> algos, strategies, tests;
    std::optional<double> rel_tol;
    bool parallel = false;
    std::string out;
};

int cmd_bench(const BenchArgs& a) {
    const auto kind = a.problem == "lasso" ? sl::ProblemKind::Lasso
                      : (a.problem == "group-lasso" || a.problem == "group")
                          ? sl::ProblemKind::GroupLasso
                          : throw std::invalid_argument("unknown problem '" + a.problem + "'");
    sl::bench::BenchPlan plan;
    if (a.preset == "paper-desk") {
        plan = sl::bench::desk_preset(kind);
    } else if (!a.preset.empty()) {
        throw std::invalid_argument("unknown preset '" + a.preset + "'");
    } else {
        plan.kind = kind;
        plan.gen.n = 100;
        plan.gen.k = 500;
        plan.gen.obs = sl::ObsKind::AtomLike;
        plan.lambda_ratios = {0.5};
        plan.algorithms = {sl::Algorithm::Fista};
        plan.strategies = {sl::Strategy::None, sl::Strategy::Static, sl::Strategy::Dynamic};
        if (kind == sl::ProblemKind::Lasso) {
            plan.tests = {sl::TestKind::Dst3};
        } else {
            plan.gen.obs = sl::ObsKind::BernoulliGaussian;
            plan.gen.group_size = 10;
            plan.tests = {sl::TestKind::GroupSt3};
        }
        plan.seeds = {0};
    }
    if (!a.kind.empty())
        plan.gen.dict = parse_or_throw<sl::DictKind>(a.kind, sl::parse_dict_kind, "dictionary kind");
    if (!a.obs.empty())
        plan.gen.obs = parse_or_throw<sl::ObsKind>(a.obs, sl::parse_obs_kind, "observation kind");
    if (a.n) plan.gen.n = *a.n;
    if (a.k) plan.gen.k = *a.k;
    if (a.group_size) plan.gen.group_size = *a.group_size;
    if (!a.ratios.empty()) plan.lambda_ratios = a.ratios;
    if (!a.algos.empty())
        plan.algorithms = parse_list<sl::Algorithm>(a.algos, sl::parse_algorithm, "algorithm");
    if (!a.strategies.empty())
        plan.strategies = parse_list<sl::Strategy>(a.strategies, sl::parse_strategy, "strategy");
    if (!a.tests.empty()) plan.tests = parse_list<sl::TestKind>(a.tests, sl::parse_test_kind, "test");
    const std::uint64_t base = a.seed ? *a.seed : default_seed();
    if (a.seeds || a.seed || std::getenv("SCREENLAB_SEED")) {
        const std::size_t count = a.seeds ? *a.seeds : plan.seeds.size();
        plan.seeds.clear();
        for (std::size_t i = 0; i < count; ++i) plan.seeds.push_back(base + i);
    }
    if (a.repeats) plan.repeats = *a.repeats;
    if (a.max_iters) plan.max_iters = *a.max_iters;
    if (a.rel_tol) plan.rel_tol = *a.rel_tol;
    plan.parallel = a.parallel;

    const auto rows = sl::bench::run_bench(plan);
    if (a.out.empty()) {
        sl::bench::write_bench_csv(std::cout, rows, plan.describe());
    } else {
        std::ofstream os(a.out);
        if (!os) throw std::runtime_error("cannot write " + a.out);
        sl::bench::write_bench_csv(os, rows, plan.describe());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
    std::string in;
    std::string out;
    std::string svg;
    std::string title = "normalized flops";
};

int cmd_report(const ReportArgs& a, const std::string& config) {
    const auto rows = sl::bench::aggregate(sl::bench::read_bench_csv(a.in));
    if (a.out.empty()) {
        sl::bench::write_report_csv(std::cout, rows, config);
    } else {
        std::ofstream os(a.out);
        if (!os) throw std::runtime_error("cannot write " + a.out);
        sl::bench::write_report_csv(os, rows, config);
    }
    if (!a.svg.empty()) {
        std::ofstream os(a.svg);
        if (!os) throw std::runtime_error("cannot write " + a.svg);
        sl::bench::write_svg(os, rows, a.title);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"screenlab: Lasso and Group-Lasso solvers with dynamic safe screening"};
    app.require_subcommand(1);
    std::string kernels = "auto";
    app.add_option("--kernels", kernels, "Kernel variant: auto, scalar or avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dictionary and observation");
    gen->add_option("--kind", ga.kind, "Dictionary: gaussian, pnoise or dct");
    gen->add_option("--obs", ga.obs,
                    "Observation: unit-sphere, atom-like or bernoulli-gaussian");
    gen->add_option("--n", ga.n, "Signal dimension N")->required();
    gen->add_option("--k", ga.k, "Number of atoms K")->required();
    gen->add_option("--seed", ga.seed, "Seed (default: $SCREENLAB_SEED or 0)");
    gen->add_option("--group-size", ga.group_size, "Also write a random group partition");
    gen->add_option("--p", ga.p, "Bernoulli activation probability per group");
    gen->add_option("--snr-db", ga.snr_db, "Signal-to-noise ratio of Bernoulli-Gaussian data");
    gen->add_option("--pnoise-scale", ga.pnoise_scale, "Noise scale of Pnoise atoms");
    gen->add_option("--out", ga.out, "Dictionary file (DSMX)")->required();
    gen->add_option("--obs-out", ga.obs_out, "Observation file (default: <out>.y.dsmx)");
    gen->add_option("--groups-out", ga.groups_out, "Groups file (default: <out>.groups)");
    gen->add_option("--truth-out", ga.truth_out, "Planted coefficients (default: <out>.x.dsmx)");
    gen->add_option("--manifest", ga.manifest, "Manifest JSON (default: <out>.json)");

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "Solve one Lasso or Group-Lasso problem");
    solve->add_option("--dict", sa.dict, "Dictionary (DSMX or CSV)")->required();
    solve->add_option("--obs", sa.obs, "Observation (DSMX or CSV)")->required();
    solve->add_option("--groups", sa.groups, "Groups file; selects the Group-Lasso");
    solve->add_option("--lambda", sa.lambda, "Regularization value");
    solve->add_option("--lambda-ratio", sa.lambda_ratio, "Regularization as a fraction of lambda*");
    solve->add_option("--algo", sa.algo, "ista, fista, twist, sparsa or cp");
    solve->add_option("--strategy", sa.strategy, "none, static or dynamic");
    solve->add_option("--test", sa.test, "safe, dst3, dome, gsafe or gst3");
    solve->add_option("--max-iters", sa.max_iters, "Iteration cap");
    solve->add_option("--rel-tol", sa.rel_tol, "Relative objective variation to stop at");
    solve->add_option("--twist-alpha", sa.twist_alpha, "TwIST alpha");
    solve->add_option("--twist-beta", sa.twist_beta, "TwIST beta");
    solve->add_option("--cp-gamma", sa.cp_gamma, "Chambolle-Pock acceleration gamma");
    solve->add_option("--trace", sa.trace, "Write the per-iteration trace as CSV");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Sweep lambda over strategies and write CSV rows");
    bench->add_option("--preset", ba.preset, "paper-desk");
    bench->add_option("--problem", ba.problem, "lasso or group-lasso");
    bench->add_option("--kind", ba.kind, "Dictionary: gaussian, pnoise or dct");
    bench->add_option("--obs", ba.obs, "Observation kind");
    bench->add_option("--n", ba.n, "Signal dimension N");
    bench->add_option("--k", ba.k, "Number of atoms K");
    bench->add_option("--group-size", ba.group_size, "Group size (Group-Lasso)");
    bench->add_option("--ratios", ba.ratios, "lambda/lambda* values")->delimiter(',');
    bench->add_option("--algos", ba.algos, "Algorithms")->delimiter(',');
    bench->add_option("--strategies", ba.strategies, "Strategies")->delimiter(',');
    bench->add_option("--tests", ba.tests, "Screening tests")->delimiter(',');
    bench->add_option("--seeds", ba.seeds, "Number of seeds");
    bench->add_option("--seed", ba.seed, "First seed (default: $SCREENLAB_SEED or 0)");
    bench->add_option("--repeats", ba.repeats, "Runs per cell");
    bench->add_option("--max-iters", ba.max_iters, "Iteration cap");
    bench->add_option("--rel-tol", ba.rel_tol, "Relative objective variation to stop at");
    bench->add_flag("--parallel", ba.parallel, "Run cells concurrently (timings become contended)");
    bench->add_option("--out", ba.out, "Output CSV (default: stdout)");

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "Aggregate a bench CSV into medians and quartiles");
    report->add_option("input", ra.in, "Bench CSV")->required();
    report->add_option("--out", ra.out, "Output CSV (default: stdout)");
    report->add_option("--svg", ra.svg, "Also write an SVG line chart");
    report->add_option("--title", ra.title, "SVG title");

    CLI11_PARSE(app, argc, argv);
    const std::string config = command_line(argc, argv);
    try {
        if (!sl::kernels::select(kernels))
            throw std::invalid_argument("kernel variant '" + kernels + "' is not available");
        if (*gen) return cmd_gen(ga);
        if (*solve) return cmd_solve(sa, config);
        if (*bench) return cmd_bench(ba);
        if (*report) return cmd_report(ra, config);
    } catch (const std::exception& e) {
        std::cerr << "screenlab: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
