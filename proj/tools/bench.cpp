#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace screenlab::bench {

namespace {

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& fmt) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ';';
        os << fmt(v[i]);
    }
    return os.str();
}

struct Instance {
    std::uint64_t seed;
    Problem problem;  // lambda = 1; rescaled per ratio
    double lambda_star;
};

Instance make_instance(const BenchPlan& plan, std::uint64_t seed) {
    GenSpec spec = plan.gen;
    spec.seed = seed;
    auto d = std::make_shared<const Dictionary>(gen_dictionary(spec));
    std::shared_ptr<const GroupPartition> part;
    if (plan.kind == ProblemKind::GroupLasso)
        part = std::make_shared<const GroupPartition>(gen_partition(*d, spec.group_size, seed));
    Observation obs = gen_observation(spec, *d, part.get());
    Problem p = plan.kind == ProblemKind::Lasso
                    ? Problem::lasso(d, std::move(obs.y), 1.0)
                    : Problem::group_lasso(d, part, std::move(obs.y), 1.0);
    const double ls = extreme_dual(p).lambda_star;
    return Instance{seed, std::move(p), ls};
}

struct Job {
    std::size_t instance;
    double ratio;
    Algorithm algo;
    Strategy strategy;
    std::optional<TestKind> test;
};

BenchRow run_job(const BenchPlan& plan, const Instance& inst, const Job& job) {
    const Problem p = inst.problem.with_lambda(job.ratio * inst.lambda_star);
    SolverConfig cfg;
    cfg.algorithm = job.algo;
    cfg.strategy = job.strategy;
    cfg.test = job.test;
    cfg.max_iters = plan.max_iters;
    cfg.rel_tol = plan.rel_tol;
    const SolveResult res = run(p, cfg);
    BenchRow row;
    row.seed = inst.seed;
    row.algo = to_string(job.algo);
    row.strategy = to_string(job.strategy);
    row.test = job.test ? to_string(*job.test) : "-";
    row.lambda_ratio = job.ratio;
    row.iters = res.iterations;
    row.flops = res.trace.total_flops();
    row.time_s = res.trace.total_seconds();
    row.final_obj = res.final_objective;
    row.screened_frac =
        static_cast<double>(res.screen.eliminated.size()) / static_cast<double>(p.k());
    return row;
}

}  // namespace

void BenchPlan::validate() const {
    gen.validate();
    if (lambda_ratios.empty()) throw std::invalid_argument("bench: no lambda ratios");
    if (!std::is_sorted(lambda_ratios.begin(), lambda_ratios.end()))
        throw std::invalid_argument("bench: lambda ratios must be ascending");
    for (double r : lambda_ratios)
        if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("bench: ratios must lie in (0, 1]");
    if (algorithms.empty() || strategies.empty() || seeds.empty())
        throw std::invalid_argument("bench: algorithms, strategies and seeds must be non-empty");
    if (repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
    const bool screens = std::any_of(strategies.begin(), strategies.end(),
                                     [](Strategy s) { return s != Strategy::None; });
    if (screens && tests.empty()) throw std::invalid_argument("bench: screening needs a test");
    for (TestKind t : tests)
        if (!test_matches_problem(t, kind))
            throw std::invalid_argument(std::string("bench: test '") + to_string(t) +
                                        "' does not apply to " + to_string(kind));
    if (kind == ProblemKind::GroupLasso && gen.group_size == 0)
        throw std::invalid_argument("bench: Group-Lasso needs a group size");
}

std::string BenchPlan::describe() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "problem=" << to_string(kind) << " dict=" << to_string(gen.dict)
       << " obs=" << to_string(gen.obs) << " n=" << gen.n << " k=" << gen.k
       << " group_size=" << gen.group_size << " p=" << gen.bernoulli_p
       << " snr_db=" << gen.snr_db << " rng=xoshiro256**"
       << " ratios=" << join(lambda_ratios, [](double r) { return r; })
       << " algos=" << join(algorithms, [](Algorithm a) { return to_string(a); })
       << " strategies=" << join(strategies, [](Strategy s) { return to_string(s); })
       << " tests=" << join(tests, [](TestKind t) { return to_string(t); })
       << " seeds=" << join(seeds, [](std::uint64_t s) { return s; })
       << " repeats=" << repeats << " max_iters=" << max_iters << " rel_tol=" << rel_tol;
    return os.str();
}

BenchPlan desk_preset(ProblemKind kind) {
    BenchPlan plan;
    plan.kind = kind;
    plan.gen.n = 200;
    plan.gen.k = 1000;
    if (kind == ProblemKind::Lasso) {
        plan.gen.dict = DictKind::Pnoise;
        plan.gen.obs = ObsKind::AtomLike;
        plan.tests = {TestKind::Safe, TestKind::Dst3, TestKind::Dome};
    } else {
        plan.gen.dict = DictKind::Pnoise;
        plan.gen.obs = ObsKind::BernoulliGaussian;
        plan.gen.group_size = 10;
        plan.tests = {TestKind::GroupSafe, TestKind::GroupSt3};
    }
    for (int i = 1; i <= 9; ++i) plan.lambda_ratios.push_back(i / 10.0);
    plan.algorithms = {Algorithm::Fista};
    plan.strategies = {Strategy::None, Strategy::Static, Strategy::Dynamic};
    for (std::uint64_t s = 0; s < 30; ++s) plan.seeds.push_back(s);
    return plan;
}

std::vector<BenchRow> run_bench(const BenchPlan& plan) {
    plan.validate();
    std::vector<Instance> instances;
    instances.reserve(plan.seeds.size());
    for (std::uint64_t s : plan.seeds) instances.push_back(make_instance(plan, s));

    std::vector<Job> jobs;
    for (std::size_t i = 0; i < instances.size(); ++i)
        for (double ratio : plan.lambda_ratios)
            for (Algorithm a : plan.algorithms)
                for (Strategy s : plan.strategies) {
                    std::vector<std::optional<TestKind>> tests;
                    if (s == Strategy::None) tests.emplace_back();
                    else
                        tests.assign(plan.tests.begin(), plan.tests.end());
                    for (const auto& t : tests)
                        for (std::size_t r = 0; r < plan.repeats; ++r)
                            jobs.push_back(Job{i, ratio, a, s, t});
                }

    std::vector<BenchRow> rows(jobs.size());
    if (!plan.parallel) {
        for (std::size_t j = 0; j < jobs.size(); ++j)
            rows[j] = run_job(plan, instances[jobs[j].instance], jobs[j]);
        return rows;
    }

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr error;
    const auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                rows[j] = run_job(plan, instances[jobs[j].instance], jobs[j]);
            } catch (...) {
                const std::lock_guard lock(err_mutex);
                if (!error) error = std::current_exception();
                next = jobs.size();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows,
                     const std::string& config) {
    if (!config.empty()) os << "# " << config << '\n';
    os << kBenchHeader << '\n';
    os << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.seed << ',' << r.algo << ',' << r.strategy << ',' << r.test << ','
           << r.lambda_ratio << ',' << r.iters << ',' << r.flops << ',' << r.time_s << ','
           << r.final_obj << ',' << r.screened_frac << '\n';
    }
}

}  // namespace screenlab::bench
