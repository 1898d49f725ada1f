#include <doctest.h>

#include <cmath>

#include "screenlab/oracle.hpp"
#include "screenlab/screening.hpp"
#include "test_util.hpp"

using namespace screenlab;
using testutil::share;

namespace {

// Identity columns in R^2, y = e1, so lambda* = 1.
Problem identity_lasso(double lambda) {
    return Problem::lasso(share(testutil::identity(2)), Vector{1.0, 0.0}, lambda);
}

Problem identity_singletons(double lambda) {
    auto d = share(testutil::identity(2));
    auto part = std::make_shared<const GroupPartition>(GroupPartition::contiguous(*d, 1));
    return Problem::group_lasso(d, part, Vector{1.0, 0.0}, lambda);
}

// Same data as a Lasso problem with singleton groups of weight 1.
Problem as_singletons(const Problem& p) {
    auto part = std::make_shared<const GroupPartition>(
        GroupPartition::contiguous(p.dictionary(), 1));
    return Problem::group_lasso(p.dictionary_ptr(), part, p.y(), p.lambda());
}

double linf(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Vector group_norms(const Problem& p, const Vector& corr) {
    const auto& part = p.partition();
    Vector out(part.size());
    for (std::size_t g = 0; g < part.size(); ++g) {
        double s = 0.0;
        for (std::size_t i : part.group(g)) s += corr[i] * corr[i];
        out[g] = std::sqrt(s);
    }
    return out;
}

bool subset(const Mask& a, const Mask& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && !b[i]) return false;
    return true;
}

Vector scaled(const Vector& v, double s) {
    Vector out = v;
    for (auto& x : out) x *= s;
    return out;
}

}  // namespace

TEST_CASE("test kind names") {
    for (TestKind k : {TestKind::Safe, TestKind::Dst3, TestKind::Dome, TestKind::GroupSafe,
                       TestKind::GroupSt3})
        CHECK(parse_test_kind(to_string(k)) == k);
    CHECK_FALSE(parse_test_kind("sphere").has_value());
    CHECK(test_matches_problem(TestKind::Dome, ProblemKind::Lasso));
    CHECK_FALSE(test_matches_problem(TestKind::GroupSt3, ProblemKind::Lasso));
    CHECK(is_group_test(TestKind::GroupSafe));
}

TEST_CASE("Lasso dual scaling") {
    const Problem p = identity_lasso(0.8);
    const Vector y = p.y();
    DualScaling s = dual_scale_lasso(p, y, 1.0);
    CHECK(s.mu == doctest::Approx(1.0));
    CHECK(s.v == y);

    s = dual_scale_lasso(p, Vector{-1.0, 0.0}, 1.0);
    CHECK(s.mu == doctest::Approx(-1.0));
    CHECK(s.v[0] == doctest::Approx(1.0));

    s = dual_scale_lasso(p, y, 0.0);
    CHECK(s.mu == doctest::Approx(1.25));

    s = dual_scale_lasso(p, Vector{0.0, 0.0}, 0.0);
    CHECK(s.mu == 0.0);
}

TEST_CASE("group dual scaling") {
    const Problem p = identity_singletons(0.8);
    const Problem l = identity_lasso(0.8);
    const Vector theta{0.7, -0.4};
    const DualScaling g = dual_scale_group(p, theta, Vector{0.7, 0.4});
    const DualScaling s = dual_scale_lasso(l, theta, 0.7);
    CHECK(g.mu == doctest::Approx(s.mu));
    CHECK(dual_scale_group(p, theta, Vector{0.0, 0.0}).mu ==
          doctest::Approx(testutil::naive_dot(theta, p.y()) / (0.8 * 0.65)));

    const Problem r = testutil::random_group_lasso(51, 10, 30, 5, 0.6);
    const double ls = extreme_dual(r).lambda_star;
    const DualScaling at_y = dual_scale_group(r, r.y(), group_norms(r, r.dictionary().correlate(r.y())));
    CHECK(at_y.mu == doctest::Approx(1.0 / ls));
}

TEST_CASE("SAFE region") {
    const Problem p = identity_lasso(0.8);
    SphereRegion r = region_safe(p, p.y());
    CHECK(r.center[0] == doctest::Approx(1.25));
    CHECK(r.radius == doctest::Approx(0.25));
    CHECK(test_sphere_lasso(r, IndexSet{0, 1}) == Mask{0, 1});

    r = region_safe(p, Vector{0.0, 0.0});
    CHECK(r.radius == doctest::Approx(1.0 / 0.8));

    const Problem q = identity_lasso(1.0);
    r = region_safe(q, q.y());
    CHECK(r.radius == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("SAFE at the static point reproduces the closed-form threshold") {
    Rng rng(52);
    for (int trial = 0; trial < 30; ++trial) {
        const Problem p = testutil::random_lasso(rng.next(), 12, 40, 0.3 + 0.6 * rng.uniform());
        const double ls = extreme_dual(p).lambda_star;
        const double lam = p.lambda();
        const Mask m = test_sphere_lasso(region_safe(p, scaled(p.y(), -1.0)), IndexSet::range(40));
        const Vector c = p.dictionary().correlate(p.y());
        for (std::size_t i = 0; i < 40; ++i) {
            const double margin = std::abs(c[i]) - (lam - 1.0 + lam / ls);
            if (std::abs(margin) < 1e-8) continue;
            CHECK(static_cast<bool>(m[i]) == (margin < 0.0));
        }
    }
}

TEST_CASE("DST3 region") {
    const Problem p = identity_lasso(0.8);
    const ExtremeDual ed = extreme_dual(p);
    const SphereRegion r = region_dst3(p, p.y(), ed);
    CHECK(r.center[0] == doctest::Approx(1.0));
    CHECK(std::abs(r.center[1]) <= 1e-15);
    CHECK(r.radius == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(test_sphere_lasso(r, IndexSet{0, 1}) == Mask{0, 1});

    const Problem q = testutil::random_lasso(53, 8, 20, 1.0);
    const SphereRegion a = region_dst3(q, scaled(q.y(), 0.3), extreme_dual(q));
    const SphereRegion b = region_safe(q, scaled(q.y(), 0.3));
    CHECK(testutil::max_abs_diff(a.center, b.center) <= 1e-12);
    CHECK(a.radius == doctest::Approx(b.radius));
}

TEST_CASE("sphere test edge cases") {
    SphereRegion r;
    r.center_correlations = {0.0, 0.5, -0.99};
    r.radius = 1.0;
    CHECK(test_sphere_lasso(r, IndexSet{0, 1, 2}) == Mask{0, 0, 0});
    r.radius = 0.0;
    CHECK(test_sphere_lasso(r, IndexSet{0, 1, 2}) == Mask{1, 1, 1});
    CHECK(test_sphere_lasso(r, IndexSet{1}) == Mask{1});
}

TEST_CASE("Dome") {
    const Problem p = identity_lasso(0.8);
    const DomeParams dp = dome_params(p, p.y(), extreme_dual(p));
    CHECK(dp.radius == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(test_dome(dp, IndexSet{0, 1}) == Mask{0, 1});

    DomeParams vacuous = dp;
    vacuous.radius = 1.0;
    vacuous.sphere_radius = 1.0;
    CHECK(test_dome(vacuous, IndexSet{0, 1}) == Mask{0, 0});
    vacuous.radius = 3.0;
    vacuous.sphere_radius = 3.0;
    CHECK(test_dome(vacuous, IndexSet{0, 1}) == Mask{0, 0});
}

TEST_CASE("GSAFE and GST3 on singleton groups") {
    const Problem p = identity_singletons(0.8);
    const SphereRegion s = region_gsafe(p, p.y());
    CHECK(s.center[0] == doctest::Approx(1.25));
    CHECK(s.radius == doctest::Approx(0.25));
    CHECK(test_sphere_group(s, p.partition(), IndexSet{0, 1}) == Mask{0, 1});
    CHECK(region_gsafe(p, Vector{0.0, 0.0}).radius == doctest::Approx(1.25));

    const SphereRegion t = region_gst3(p, p.y(), extreme_dual(p));
    CHECK(t.center[0] == doctest::Approx(1.0));
    CHECK(t.radius == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(test_sphere_group(t, p.partition(), IndexSet{0, 1}) == Mask{0, 1});

    SphereRegion wide = t;
    wide.radius = 1.0;
    CHECK(test_sphere_group(wide, p.partition(), IndexSet{0, 1}) == Mask{0, 0});
}

TEST_CASE("property: singleton groups specialize the Lasso tests") {
    Rng rng(54);
    for (int trial = 0; trial < 60; ++trial) {
        const Problem l = testutil::random_lasso(rng.next(), 10, 30, 0.2 + 0.75 * rng.uniform());
        const Problem g = as_singletons(l);
        const Vector theta = testutil::random_vector(rng, 10);
        const ExtremeDual el = extreme_dual(l), eg = extreme_dual(g);
        CHECK(el.lambda_star == doctest::Approx(eg.lambda_star));

        const SphereRegion a = region_safe(l, theta), b = region_gsafe(g, theta);
        CHECK(testutil::max_abs_diff(a.center, b.center) <= 1e-10);
        CHECK(std::abs(a.radius - b.radius) <= 1e-10);
        const SphereRegion c = region_dst3(l, theta, el), d = region_gst3(g, theta, eg);
        CHECK(testutil::max_abs_diff(c.center, d.center) <= 1e-10);
        CHECK(std::abs(c.radius - d.radius) <= 1e-10);

        const IndexSet all = IndexSet::range(30);
        CHECK(test_sphere_lasso(a, all) == test_sphere_group(b, g.partition(), all));
        CHECK(test_sphere_lasso(c, all) == test_sphere_group(d, g.partition(), all));
    }
}

TEST_CASE("property: nesting and feasibility at shared theta") {
    Rng rng(55);
    for (int trial = 0; trial < 120; ++trial) {
        const double ratio = 0.1 + 0.9 * rng.uniform();
        const Problem p = testutil::random_lasso(rng.next(), 12, 40, ratio);
        const ExtremeDual ed = extreme_dual(p);
        // Dual points along the path from y to a random direction.
        Vector theta = testutil::random_vector(rng, 12);
        const double w = rng.uniform();
        for (std::size_t i = 0; i < 12; ++i) theta[i] = w * theta[i] - (1 - w) * p.y()[i];

        const IndexSet all = IndexSet::range(40);
        const SphereRegion safe = region_safe(p, theta);
        const SphereRegion st3 = region_dst3(p, theta, ed);
        CHECK(safe.radius_sq_raw >= -1e-8);
        CHECK(st3.radius_sq_raw >= -1e-8);
        CHECK(std::isfinite(st3.radius));
        const Mask ms = test_sphere_lasso(safe, all);
        const Mask mt = test_sphere_lasso(st3, all);
        const Mask md = test_dome(dome_params(p, theta, ed), all);
        // The DST3 ball is not contained in the SAFE ball, so only inclusions
        // in the Dome (SAFE ball cut by the half-space) hold at arbitrary theta.
        CHECK(subset(ms, md));
        CHECK(subset(mt, md));

        const DualScaling s = dual_scale_lasso(p, theta, linf(p.dictionary().correlate(theta)));
        CHECK(dual_feasible(p, s.v, 1e-9));

        const Problem g = testutil::random_group_lasso(rng.next(), 12, 40, 1 + rng.below(8), ratio);
        const Vector gtheta = testutil::random_vector(rng, 12);
        const IndexSet groups = IndexSet::range(g.partition().size());
        const SphereRegion gt = region_gst3(g, gtheta, extreme_dual(g));
        CHECK(gt.radius_sq_raw >= -1e-8);
        const DualScaling gsc =
            dual_scale_group(g, gtheta, group_norms(g, g.dictionary().correlate(gtheta)));
        CHECK(dual_feasible(g, gsc.v, 1e-9));
    }
}

TEST_CASE("property: every test is safe at arbitrary dual points") {
    Rng rng(56);
    for (int trial = 0; trial < 40; ++trial) {
        const double ratio = 0.2 + 0.75 * rng.uniform();
        const bool group = trial % 2 == 1;
        const Problem p = group ? testutil::random_group_lasso(rng.next(), 10, 30, 3, ratio)
                                : testutil::random_lasso(rng.next(), 10, 30, ratio);
        const OracleResult ref = solve_reference(p, 1e-12);
        const Vector theta = testutil::random_vector(rng, 10);
        const std::vector<TestKind> kinds =
            group ? std::vector<TestKind>{TestKind::GroupSafe, TestKind::GroupSt3}
                  : std::vector<TestKind>{TestKind::Safe, TestKind::Dst3, TestKind::Dome};
        for (TestKind k : kinds) {
            const Screener sc(p, k);
            const IndexSet all = IndexSet::range(30);
            const Screener::Step step = sc.evaluate(theta, p.dictionary().correlate(theta), all);
            const ScreenState st = screen_update(ScreenState::initial(30, k), step.mask);
            CHECK(verify_screen_safety(p, st, ref));
            const ScreenState stat =
                screen_update(ScreenState::initial(30, k), sc.evaluate_static().mask);
            CHECK(verify_screen_safety(p, stat, ref));
        }
    }
}

TEST_CASE("Screener matches the region functions") {
    Rng rng(57);
    const Problem p = testutil::random_lasso(58, 10, 30, 0.6);
    const ExtremeDual ed = extreme_dual(p);
    const Vector theta = testutil::random_vector(rng, 10);
    const IndexSet kept{0, 3, 4, 9, 17, 29};
    Vector corr;
    const Vector full = p.dictionary().correlate(theta);
    for (std::size_t i : kept) corr.push_back(full[i]);
    // Clipping uses only the kept correlations, so compare with an explicit
    // scaling of the same value.
    const Screener sc(p, TestKind::Dst3);
    const Screener::Step step = sc.evaluate(theta, corr, kept);
    CHECK(step.mu == doctest::Approx(dual_scale_lasso(p, theta, linf(corr)).mu));
    REQUIRE(step.mask.size() == kept.size());

    const Screener all(p, TestKind::Dome);
    const Screener::Step s2 = all.evaluate(theta, full, IndexSet::range(30));
    CHECK(s2.mask == test_dome(dome_params(p, theta, ed), IndexSet::range(30)));

    CHECK_THROWS(Screener(p, TestKind::GroupSafe));
    CHECK_THROWS(Screener(p.with_lambda(2.0 * ed.lambda_star), TestKind::Safe));
}

TEST_CASE("group mask expansion") {
    auto d = share(testutil::identity(4));
    const GroupPartition part(*d, {IndexSet{0, 2}, IndexSet{1}, IndexSet{3}});
    const Mask m = expand_group_mask(Mask{1, 0}, IndexSet{0, 2}, part, IndexSet{0, 2, 3});
    CHECK(m == Mask{1, 1, 0});
}

TEST_CASE("screen state updates") {
    const ScreenState s0 = ScreenState::initial(5, TestKind::Safe);
    CHECK(s0.kept == IndexSet::range(5));
    CHECK(screen_update(s0, Mask(5, 0)).kept == s0.kept);
    const ScreenState all = screen_update(s0, Mask(5, 1));
    CHECK(all.kept.empty());
    CHECK(all.eliminated == IndexSet::range(5));

    Rng rng(59);
    for (int trial = 0; trial < 50; ++trial) {
        Mask m1(8), m2(8), un(8);
        for (std::size_t i = 0; i < 8; ++i) {
            m1[i] = rng.below(3) == 0;
            m2[i] = rng.below(3) == 0;
            un[i] = m1[i] || m2[i];
        }
        const ScreenState a = screen_update(ScreenState::initial(8, TestKind::Safe), m1);
        Mask m2_kept;
        for (std::size_t i : a.kept) m2_kept.push_back(m2[i]);
        const ScreenState b = screen_update(a, m2_kept);
        const ScreenState c = screen_update(ScreenState::initial(8, TestKind::Safe), un);
        CHECK(b.kept == c.kept);
        CHECK(b.eliminated == c.eliminated);
    }
}
