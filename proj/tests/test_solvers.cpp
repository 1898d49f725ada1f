#include <doctest.h>

#include <cmath>

#include "screenlab/oracle.hpp"
#include "screenlab/solvers.hpp"
#include "test_util.hpp"

using namespace screenlab;
using testutil::share;

namespace {

Problem identity_lasso(Vector y, double lambda) {
    return Problem::lasso(share(testutil::identity(2)), std::move(y), lambda);
}

SolverConfig config(Algorithm a, Strategy s = Strategy::None, std::optional<TestKind> t = {}) {
    SolverConfig cfg;
    cfg.algorithm = a;
    cfg.strategy = s;
    cfg.test = t;
    return cfg;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

constexpr Algorithm kAlgorithms[] = {Algorithm::Ista, Algorithm::Fista, Algorithm::Twist,
                                     Algorithm::Sparsa, Algorithm::ChambollePock};

}  // namespace

TEST_CASE("algorithm names") {
    for (Algorithm a : kAlgorithms) CHECK(parse_algorithm(to_string(a)) == a);
    CHECK_FALSE(parse_algorithm("admm").has_value());
}

TEST_CASE("config validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.backtrack_factor = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SolverConfig{};
    cfg.rel_tol = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK(SolverConfig{}.resolved_test(ProblemKind::GroupLasso) == TestKind::GroupSafe);
    const Problem p = identity_lasso({1.0, 0.0}, 0.5);
    CHECK_THROWS(run(p, config(Algorithm::Ista, Strategy::Dynamic, TestKind::GroupSt3)));
}

TEST_CASE("ISTA on an orthonormal dictionary") {
    const Problem p = identity_lasso({0.6, -0.8}, 0.3);
    const ActiveProblem ap(p);
    const SolverConfig cfg = config(Algorithm::Ista);
    SolverState s = init_state(ap, cfg, 1.0);
    update_ista(s, ap, cfg);
    const Vector expected = prox_l1(p.y(), 0.3);
    CHECK(testutil::max_abs_diff(s.x, expected) <= 1e-15);

    update_ista(s, ap, cfg);
    CHECK(testutil::max_abs_diff(s.x, expected) <= 1e-15);
}

TEST_CASE("FISTA momentum recurrence and first step") {
    const Problem p = identity_lasso({0.6, -0.8}, 0.3);
    const ActiveProblem ap(p);
    const SolverConfig cfg = config(Algorithm::Fista);
    SolverState s = init_state(ap, cfg, 1.0);
    CHECK(s.l == 1.0);
    update_fista(s, ap, cfg);
    CHECK(s.l == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(testutil::max_abs_diff(s.x, prox_l1(p.y(), 0.3)) <= 1e-15);
}

TEST_CASE("TwIST with alpha = beta = 1 is a unit-step ISTA") {
    const Problem p = testutil::random_lasso(61, 8, 20, 0.4);
    const ActiveProblem ap(p);
    SolverConfig cfg = config(Algorithm::Twist);
    cfg.twist_alpha = cfg.twist_beta = 1.0;
    const double norm = spectral_norm(p.dictionary());
    SolverState s = init_state(ap, cfg, norm);
    Vector x(20, 0.0);
    const double L = norm * norm;
    for (int t = 0; t < 5; ++t) {
        update_twist(s, ap, cfg);
        const Vector r = p.dictionary().apply(x);
        Vector res = p.y();
        for (std::size_t i = 0; i < res.size(); ++i) res[i] -= r[i];
        const Vector g = p.dictionary().correlate(res);
        Vector z(20);
        for (std::size_t i = 0; i < 20; ++i) z[i] = x[i] + g[i] / L;
        x = prox_l1(z, p.lambda() / L);
        CHECK(testutil::max_abs_diff(s.x, x) <= 1e-12);
    }
}

TEST_CASE("TwIST keeps an orthonormal optimum fixed") {
    const Problem p = identity_lasso({0.6, -0.8}, 0.3);
    const ActiveProblem ap(p);
    const SolverConfig cfg = config(Algorithm::Twist);
    SolverState s = init_state(ap, cfg, 1.0);
    const Vector xs = prox_l1(p.y(), 0.3);
    s.x = s.x_prev = xs;
    s.dx = s.dx_prev = p.dictionary().apply(xs);
    update_twist(s, ap, cfg);
    CHECK(testutil::max_abs_diff(s.x, xs) <= 1e-14);
}

TEST_CASE("SpaRSA Barzilai-Borwein estimate") {
    const Problem p = identity_lasso({0.6, -0.8}, 0.1);
    const ActiveProblem ap(p);
    const SolverConfig cfg = config(Algorithm::Sparsa);
    SolverState s = init_state(ap, cfg, 0.0);
    update_sparsa(s, ap, cfg);
    update_sparsa(s, ap, cfg);
    CHECK(s.L == doctest::Approx(1.0).epsilon(1e-14));

    const double before = s.L;
    update_sparsa(s, ap, cfg);  // already at the fixed point: no displacement
    CHECK(s.L == before);
}

TEST_CASE("Chambolle-Pock step rules") {
    const Problem p = testutil::random_lasso(62, 8, 20, 0.4);
    const ActiveProblem ap(p);
    SolverConfig cfg = config(Algorithm::ChambollePock);
    const double norm = spectral_norm(p.dictionary());
    SolverState s = init_state(ap, cfg, norm);
    CHECK(s.tau * s.sigma * norm * norm <= 1.0);
    const double tau0 = s.tau, sigma0 = s.sigma;
    for (int t = 0; t < 5; ++t) update_cp(s, ap, cfg);
    CHECK(s.tau == tau0);
    CHECK(s.sigma == sigma0);

    SolverState frozen = init_state(ap, cfg, norm);
    frozen.sigma = 0.0;
    const Vector theta0 = frozen.theta;
    update_cp(frozen, ap, cfg);
    CHECK(frozen.theta == theta0);

    cfg.cp_gamma = 1.0;
    SolverState acc = init_state(ap, cfg, norm);
    update_cp(acc, ap, cfg);
    CHECK(acc.tau < tau0);
    CHECK(acc.tau * acc.sigma == doctest::Approx(tau0 * sigma0));
}

TEST_CASE("run: trivial regime and orthonormal solution") {
    const Problem big = testutil::random_lasso(63, 6, 12, 1.5);
    for (Strategy st : {Strategy::None, Strategy::Dynamic}) {
        const SolveResult r = run(big, config(Algorithm::Fista, st));
        CHECK(r.iterations == 0);
        CHECK(r.x_star == Vector(12, 0.0));
        CHECK(r.screen.eliminated.size() == 12);
    }
    const Problem p = identity_lasso({1.0, 0.0}, 0.8);
    for (Algorithm a : kAlgorithms) {
        SolverConfig cfg = config(a, Strategy::Dynamic, TestKind::Dst3);
        cfg.max_iters = 5000;
        cfg.rel_tol = 1e-14;
        const SolveResult r = run(p, cfg);
        CAPTURE(to_string(a));
        CHECK(std::abs(r.x_star[0] - 0.2) <= 1e-6);
        CHECK(r.x_star[1] == 0.0);
        CHECK(r.final_objective == doctest::Approx(0.48).epsilon(1e-10));
    }
}

TEST_CASE("ISTA with dynamic SAFE reproduces the static set at the first iteration") {
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial) {
        const Problem p = testutil::random_lasso(rng.next(), 15, 50, 0.3 + 0.6 * rng.uniform());
        const Screener sc(p, TestKind::Safe);
        const ScreenState stat =
            screen_update(ScreenState::initial(50, TestKind::Safe), sc.evaluate_static().mask);
        std::optional<IndexSet> first;
        run(p, config(Algorithm::Ista, Strategy::Dynamic, TestKind::Safe),
            [&](const IterationEvent& ev) {
                if (ev.t == 1) first = ev.kept_after;
            });
        REQUIRE(first.has_value());
        CHECK(*first == stat.kept);
    }
}

TEST_CASE("property: loop invariants hold on every iteration") {
    Rng rng(65);
    std::size_t iterations = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const bool group = trial % 2 == 1;
        const double ratio = 0.3 + 0.6 * rng.uniform();
        const Problem p = group ? testutil::random_group_lasso(rng.next(), 12, 36, 4, ratio)
                                : testutil::random_lasso(rng.next(), 12, 36, ratio);
        const Algorithm a = kAlgorithms[trial % 5];
        const TestKind t = group ? TestKind::GroupSt3 : TestKind::Dome;
        SolverConfig cfg = config(a, Strategy::Dynamic, t);
        cfg.max_iters = 300;
        std::size_t prev_kept = p.k();
        run(p, cfg, [&](const IterationEvent& ev) {
            ++iterations;
            CHECK(ev.kept_after.size() <= prev_kept);
            CHECK(ev.kept_after.is_subset_of(ev.kept_before));
            prev_kept = ev.kept_after.size();
            const std::size_t kept = ev.kept_after.size();
            CHECK(ev.state.x.size() == kept);
            CHECK(ev.state.x_prev.size() == kept);
            if (a == Algorithm::Fista || a == Algorithm::ChambollePock)
                CHECK(ev.state.u.size() == kept);
            const Vector full = expand(ev.state.x, ev.kept_after, p.k());
            CHECK(std::abs(objective(p, full) - ev.objective) <= 1e-10 * std::max(1.0, ev.objective));
            if (ev.step.L > 0.0)
                CHECK(ev.step.f_new <= ev.step.model + 1e-12 * std::max(1.0, ev.step.model));
        });
    }
    CHECK(iterations > 1000);
}

TEST_CASE("every algorithm reaches the oracle objective") {
    Rng rng(66);
    for (int trial = 0; trial < 6; ++trial) {
        const bool group = trial % 2 == 1;
        const double ratio = 0.3 + 0.6 * rng.uniform();
        const Problem p = group ? testutil::random_group_lasso(rng.next(), 15, 40, 5, ratio)
                                : testutil::random_lasso(rng.next(), 15, 40, ratio);
        const OracleResult ref = solve_reference(p, 1e-13);
        for (Algorithm a : kAlgorithms) {
            for (Strategy st : {Strategy::None, Strategy::Static, Strategy::Dynamic}) {
                SolverConfig cfg = config(a, st);
                cfg.max_iters = 20000;
                cfg.rel_tol = 1e-15;
                const SolveResult r = run(p, cfg);
                CAPTURE(to_string(a));
                CAPTURE(to_string(st));
                CHECK(rel(r.final_objective, ref.objective) <= 1e-9);
                CHECK(ref.objective <= r.final_objective + 1e-13);
            }
        }
    }
}

TEST_CASE("stopping rule and trace bookkeeping") {
    const Problem p = testutil::random_lasso(67, 20, 60, 0.5);
    SolverConfig cfg = config(Algorithm::Ista, Strategy::Dynamic, TestKind::Dst3);
    cfg.max_iters = 7;
    cfg.rel_tol = 1e-300;
    const SolveResult r = run(p, cfg);
    CHECK(r.iterations == 7);
    REQUIRE(r.trace.records.size() == 7);
    CHECK(r.trace.records.back().kept == r.screen.kept.size());
    CHECK(flops_consistent(r.trace));
    CHECK(r.trace.instance == instance_fingerprint(p));
}

TEST_CASE("reduce_state compacts every buffer") {
    const Problem p = testutil::random_lasso(68, 10, 20, 0.5);
    ActiveProblem ap(p);
    const SolverConfig cfg = config(Algorithm::Fista);
    SolverState s = init_state(ap, cfg, 0.0);
    for (int t = 0; t < 3; ++t) update_fista(s, ap, cfg);
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < 20; ++i)
        if (i % 3 != 0 || s.x[i] == 0.0) pos.push_back(i);
    Vector keep_x;
    for (std::size_t i : pos) keep_x.push_back(s.x[i]);
    ap.retain(pos);
    reduce_state(s, ap, pos);
    CHECK(s.x == keep_x);
    CHECK(s.u.size() == pos.size());
    const Vector dx = ap.dictionary().apply(s.x);
    CHECK(testutil::max_abs_diff(dx, s.dx) <= 1e-12);
}
