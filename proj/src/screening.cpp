#include "screenlab/screening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "screenlab/kernels.hpp"

namespace screenlab {

const char* to_string(TestKind kind) {
    switch (kind) {
        case TestKind::Safe: return "safe";
        case TestKind::Dst3: return "dst3";
        case TestKind::Dome: return "dome";
        case TestKind::GroupSafe: return "gsafe";
        case TestKind::GroupSt3: return "gst3";
    }
    return "?";
}

std::optional<TestKind> parse_test_kind(std::string_view name) {
    if (name == "safe") return TestKind::Safe;
    if (name == "dst3" || name == "st3") return TestKind::Dst3;
    if (name == "dome" || name == "ddome") return TestKind::Dome;
    if (name == "gsafe") return TestKind::GroupSafe;
    if (name == "gst3" || name == "dgst3") return TestKind::GroupSt3;
    return std::nullopt;
}

bool is_group_test(TestKind kind) {
    return kind == TestKind::GroupSafe || kind == TestKind::GroupSt3;
}

bool test_matches_problem(TestKind kind, ProblemKind problem) {
    return is_group_test(kind) == (problem == ProblemKind::GroupLasso);
}

namespace {

double unclipped_mu(const Problem& p, std::span<const double> theta, double theta_sq) {
    return kernels::dot(theta, p.y()) / (p.lambda() * theta_sq);
}

double clip(double v, double bound) { return std::clamp(v, -bound, bound); }

// |y/lambda - mu theta|
double sphere_radius(const Problem& p, std::span<const double> theta, double mu) {
    const double inv_lam = 1.0 / p.lambda();
    double s = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double d = p.y()[i] * inv_lam - mu * theta[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double mu_lasso(const Problem& p, std::span<const double> theta, double corr_inf) {
    const double tt = kernels::sqnorm(theta);
    if (tt == 0.0) return 0.0;
    const double mu = unclipped_mu(p, theta, tt);
    return corr_inf > 0.0 ? clip(mu, 1.0 / corr_inf) : mu;
}

double mu_group(const Problem& p, std::span<const double> theta,
                std::span<const double> group_corr_norms) {
    const double tt = kernels::sqnorm(theta);
    if (tt == 0.0) return 0.0;
    const auto& part = p.partition();
    double s_min = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < group_corr_norms.size(); ++g) {
        if (group_corr_norms[g] > 0.0) s_min = std::min(s_min, part.weight(g) / group_corr_norms[g]);
    }
    const double mu = unclipped_mu(p, theta, tt);
    return std::isfinite(s_min) ? clip(mu, s_min) : mu;
}

DualScaling make_scaling(std::span<const double> theta, double mu) {
    DualScaling ds{mu, Vector(theta.size())};
    for (std::size_t i = 0; i < theta.size(); ++i) ds.v[i] = mu * theta[i];
    return ds;
}

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Vector group_norms(const GroupPartition& part, std::span<const double> corr) {
    Vector out(part.size(), 0.0);
    for (std::size_t g = 0; g < part.size(); ++g) {
        double sq = 0.0;
        for (std::size_t i : part.group(g)) sq += corr[i] * corr[i];
        out[g] = std::sqrt(sq);
    }
    return out;
}

void require_nontrivial(const Problem& p, const ExtremeDual& ed) {
    if (p.lambda() > ed.lambda_star)
        throw std::invalid_argument("screening region needs lambda <= lambda_star");
}

// Centre of the DST3 sphere: y/lambda - (lambda*/lambda - 1) a_*.
Vector dst3_center(const Problem& p, const ExtremeDual& ed) {
    const double shift = ed.lambda_star / p.lambda() - 1.0;
    Vector c(p.n());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = p.y()[i] / p.lambda() - shift * ed.star_atom[i];
    return c;
}

// Centre of the group ST3 sphere: projection of y/lambda onto the hyperplane
// tangent to the g_* constraint at y/lambda_*.
Vector gst3_center(const Problem& p, const ExtremeDual& ed) {
    const auto& d = p.dictionary();
    const auto& part = p.partition();
    const auto& g = part.group(ed.star_index);
    Vector n(p.n(), 0.0);
    for (std::size_t i : g) {
        const double coef = kernels::dot(d.column(i), p.y()) / ed.lambda_star;
        kernels::axpy(coef, d.column(i), n);
    }
    const double nn = kernels::sqnorm(n);
    const double w = part.weight(ed.star_index);
    const double ny = kernels::dot(n, p.y());
    const double coef = (ny / p.lambda() - w * w) / nn;
    Vector c(p.n());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = p.y()[i] / p.lambda() - coef * n[i];
    return c;
}

double offset_sq(const Problem& p, std::span<const double> c) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double d = p.y()[i] / p.lambda() - c[i];
        s += d * d;
    }
    return s;
}

Mask sphere_mask(std::span<const double> center_corr, double radius, const IndexSet& kept) {
    Mask m(kept.size(), 0);
    for (std::size_t k = 0; k < kept.size(); ++k)
        m[k] = (1.0 - std::abs(center_corr[kept[k]])) - radius > kScreenMargin;
    return m;
}

Mask dome_mask(double lam, double lam_star, std::span<const double> star_corr,
               std::span<const double> y_corr, double sphere_r, double r, const IndexSet& kept) {
    Mask m(kept.size(), 0);
    if (r >= 1.0) return m;
    // Normalised distance from the sphere centre to the half-space boundary.
    // The sphere's own maximiser stays inside the half-space when
    // a_*^T a_i <= -psi; the cap formula applies otherwise.
    double psi = 1.0;
    if (sphere_r > 0.0) psi = std::min(1.0, (lam_star / lam - 1.0) / sphere_r);
    const double flat = lam * (1.0 - sphere_r);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const std::size_t i = kept[k];
        const double t = std::clamp(star_corr[i], -1.0, 1.0);
        const double u = y_corr[i];
        const double cap = lam * r * std::sqrt(std::max(0.0, 1.0 - t * t));
        const double upper = t < -psi ? flat : (lam_star - lam) * t + lam - cap;
        const double lower = t > psi ? -flat : (lam_star - lam) * t - lam + cap;
        m[k] = lower + lam * kScreenMargin < u && u < upper - lam * kScreenMargin;
    }
    return m;
}

Mask group_sphere_mask(std::span<const double> group_center_norm, const GroupPartition& part,
                       double radius, const IndexSet& kept_groups) {
    Mask m(kept_groups.size(), 0);
    for (std::size_t k = 0; k < kept_groups.size(); ++k) {
        const std::size_t g = kept_groups[k];
        const double nrm = part.spectral_norm(g);
        if (nrm == 0.0) continue;
        m[k] = (part.weight(g) / nrm - group_center_norm[g] / nrm) - radius > kScreenMargin;
    }
    return m;
}

IndexSet groups_of(const IndexSet& kept, const GroupPartition& part) {
    std::vector<std::size_t> gs;
    gs.reserve(kept.size());
    for (std::size_t i : kept) gs.push_back(part.group_of(i));
    std::sort(gs.begin(), gs.end());
    gs.erase(std::unique(gs.begin(), gs.end()), gs.end());
    return IndexSet(std::move(gs));
}

}  // namespace

DualScaling dual_scale_lasso(const Problem& p, std::span<const double> theta, double corr_inf) {
    if (theta.size() != p.n()) throw DimensionError("dual_scale_lasso: theta must have N entries");
    if (corr_inf < 0.0) throw std::invalid_argument("dual_scale_lasso: corr_inf must be >= 0");
    return make_scaling(theta, mu_lasso(p, theta, corr_inf));
}

DualScaling dual_scale_group(const Problem& p, std::span<const double> theta,
                             std::span<const double> group_corr_norms) {
    if (theta.size() != p.n()) throw DimensionError("dual_scale_group: theta must have N entries");
    if (group_corr_norms.size() != p.partition().size())
        throw DimensionError("dual_scale_group: one norm per group expected");
    return make_scaling(theta, mu_group(p, theta, group_corr_norms));
}

SphereRegion region_safe(const Problem& p, std::span<const double> theta) {
    const Vector corr = p.dictionary().correlate(theta);
    const double mu = mu_lasso(p, theta, inf_norm(corr));
    SphereRegion r;
    r.center.resize(p.n());
    for (std::size_t i = 0; i < p.n(); ++i) r.center[i] = p.y()[i] / p.lambda();
    r.radius = sphere_radius(p, theta, mu);
    r.radius_sq_raw = r.radius * r.radius;
    r.center_correlations = p.dictionary().correlate(r.center);
    return r;
}

SphereRegion region_dst3(const Problem& p, std::span<const double> theta, const ExtremeDual& ed) {
    require_nontrivial(p, ed);
    const Vector corr = p.dictionary().correlate(theta);
    const double mu = mu_lasso(p, theta, inf_norm(corr));
    const double big = sphere_radius(p, theta, mu);
    const double shift = ed.lambda_star / p.lambda() - 1.0;
    SphereRegion r;
    r.center = dst3_center(p, ed);
    r.radius_sq_raw = big * big - shift * shift;
    r.radius = std::sqrt(std::max(0.0, r.radius_sq_raw));
    r.center_correlations = p.dictionary().correlate(r.center);
    return r;
}

SphereRegion region_gsafe(const Problem& p, std::span<const double> theta) {
    const Vector corr = p.dictionary().correlate(theta);
    const double mu = mu_group(p, theta, group_norms(p.partition(), corr));
    SphereRegion r;
    r.center.resize(p.n());
    for (std::size_t i = 0; i < p.n(); ++i) r.center[i] = p.y()[i] / p.lambda();
    r.radius = sphere_radius(p, theta, mu);
    r.radius_sq_raw = r.radius * r.radius;
    r.center_correlations = p.dictionary().correlate(r.center);
    return r;
}

SphereRegion region_gst3(const Problem& p, std::span<const double> theta, const ExtremeDual& ed) {
    require_nontrivial(p, ed);
    const Vector corr = p.dictionary().correlate(theta);
    const double mu = mu_group(p, theta, group_norms(p.partition(), corr));
    const double big = sphere_radius(p, theta, mu);
    SphereRegion r;
    r.center = gst3_center(p, ed);
    r.radius_sq_raw = big * big - offset_sq(p, r.center);
    r.radius = std::sqrt(std::max(0.0, r.radius_sq_raw));
    r.center_correlations = p.dictionary().correlate(r.center);
    return r;
}

DomeParams dome_params(const Problem& p, std::span<const double> theta, const ExtremeDual& ed) {
    require_nontrivial(p, ed);
    const Vector corr = p.dictionary().correlate(theta);
    const double mu = mu_lasso(p, theta, inf_norm(corr));
    const double big = sphere_radius(p, theta, mu);
    const double shift = ed.lambda_star / p.lambda() - 1.0;
    DomeParams dp;
    dp.lambda = p.lambda();
    dp.lambda_star = ed.lambda_star;
    dp.star_correlations = p.dictionary().correlate(ed.star_atom);
    dp.y_correlations = p.dictionary().correlate(p.y());
    dp.sphere_radius = big;
    dp.radius = std::sqrt(std::max(0.0, big * big - shift * shift));
    return dp;
}

Mask test_sphere_lasso(const SphereRegion& region, const IndexSet& kept) {
    return sphere_mask(region.center_correlations, region.radius, kept);
}

Mask test_dome(const DomeParams& dome, const IndexSet& kept) {
    return dome_mask(dome.lambda, dome.lambda_star, dome.star_correlations, dome.y_correlations,
                     dome.sphere_radius, dome.radius, kept);
}

Mask test_sphere_group(const SphereRegion& region, const GroupPartition& partition,
                       const IndexSet& kept_groups) {
    const Vector norms = group_norms(partition, region.center_correlations);
    return group_sphere_mask(norms, partition, region.radius, kept_groups);
}

Mask expand_group_mask(const Mask& group_mask, const IndexSet& kept_groups,
                       const GroupPartition& partition, const IndexSet& kept) {
    if (group_mask.size() != kept_groups.size())
        throw DimensionError("expand_group_mask: mask does not match kept groups");
    std::vector<std::uint8_t> by_group(partition.size(), 0);
    for (std::size_t k = 0; k < kept_groups.size(); ++k) by_group[kept_groups[k]] = group_mask[k];
    Mask m(kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) m[k] = by_group[partition.group_of(kept[k])];
    return m;
}

ScreenState ScreenState::initial(std::size_t k, TestKind test) {
    return ScreenState{IndexSet{}, IndexSet::range(k), test};
}

ScreenState screen_update(const ScreenState& state, std::span<const std::uint8_t> mask) {
    if (mask.size() != state.kept.size())
        throw DimensionError("screen_update: mask is not aligned with the kept set");
    std::vector<std::size_t> kept;
    std::vector<std::size_t> fresh;
    kept.reserve(state.kept.size());
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k]) fresh.push_back(state.kept[k]);
        else kept.push_back(state.kept[k]);
    }
    if (fresh.empty()) return state;
    return ScreenState{state.eliminated.set_union(IndexSet(std::move(fresh))),
                       IndexSet(std::move(kept)), state.test};
}

// ---------------------------------------------------------------------------
// Screener

Screener::Screener(const Problem& p, TestKind kind) : problem_(p), kind_(kind) {
    if (!test_matches_problem(kind, p.kind()))
        throw std::invalid_argument(std::string("test '") + to_string(kind) +
                                    "' does not apply to a " + to_string(p.kind()) + " problem");
    const auto& d = p.dictionary();
    y_corr_ = d.correlate(p.y());
    ed_ = extreme_dual(p);
    require_nontrivial(p, ed_);

    const double inv_lam = 1.0 / p.lambda();
    switch (kind) {
        case TestKind::Safe:
        case TestKind::GroupSafe:
            center_corr_.resize(y_corr_.size());
            for (std::size_t i = 0; i < y_corr_.size(); ++i) center_corr_[i] = y_corr_[i] * inv_lam;
            break;
        case TestKind::Dst3:
        case TestKind::Dome: {
            star_corr_ = d.correlate(ed_.star_atom);
            const double shift = ed_.lambda_star * inv_lam - 1.0;
            center_corr_.resize(y_corr_.size());
            for (std::size_t i = 0; i < y_corr_.size(); ++i)
                center_corr_[i] = y_corr_[i] * inv_lam - shift * star_corr_[i];
            center_offset_sq_ = shift * shift;
            break;
        }
        case TestKind::GroupSt3: {
            const Vector c = gst3_center(p, ed_);
            center_corr_ = d.correlate(c);
            center_offset_sq_ = offset_sq(p, c);
            break;
        }
    }
    if (is_group_test(kind)) group_center_norm_ = group_norms(p.partition(), center_corr_);
}

Screener::Step Screener::evaluate(std::span<const double> theta,
                                  std::span<const double> correlations,
                                  const IndexSet& kept) const {
    const Problem& p = problem_;
    if (theta.size() != p.n()) throw DimensionError("Screener: theta must have N entries");
    if (correlations.size() != kept.size())
        throw DimensionError("Screener: correlations must align with the kept set");

    Step step;
    IndexSet kept_groups;
    if (is_group_test(kind_)) {
        const auto& part = p.partition();
        Vector sq(part.size(), 0.0);
        for (std::size_t k = 0; k < kept.size(); ++k)
            sq[part.group_of(kept[k])] += correlations[k] * correlations[k];
        for (double& v : sq) v = std::sqrt(v);
        step.mu = mu_group(p, theta, sq);
        kept_groups = groups_of(kept, part);
    } else {
        step.mu = mu_lasso(p, theta, inf_norm(correlations));
    }

    const double big = sphere_radius(p, theta, step.mu);
    switch (kind_) {
        case TestKind::Safe:
            step.radius = big;
            step.radius_sq_raw = big * big;
            step.mask = sphere_mask(center_corr_, step.radius, kept);
            break;
        case TestKind::Dst3:
            step.radius_sq_raw = big * big - center_offset_sq_;
            step.radius = std::sqrt(std::max(0.0, step.radius_sq_raw));
            step.mask = sphere_mask(center_corr_, step.radius, kept);
            break;
        case TestKind::Dome:
            step.radius_sq_raw = big * big - center_offset_sq_;
            step.radius = std::sqrt(std::max(0.0, step.radius_sq_raw));
            step.mask = dome_mask(p.lambda(), ed_.lambda_star, star_corr_, y_corr_, big,
                                  step.radius, kept);
            break;
        case TestKind::GroupSafe:
        case TestKind::GroupSt3: {
            if (kind_ == TestKind::GroupSafe) {
                step.radius = big;
                step.radius_sq_raw = big * big;
            } else {
                step.radius_sq_raw = big * big - center_offset_sq_;
                step.radius = std::sqrt(std::max(0.0, step.radius_sq_raw));
            }
            const Mask gm =
                group_sphere_mask(group_center_norm_, p.partition(), step.radius, kept_groups);
            step.mask = expand_group_mask(gm, kept_groups, p.partition(), kept);
            break;
        }
    }
    return step;
}

Screener::Step Screener::evaluate_static() const {
    return evaluate(problem_.y(), y_corr_, IndexSet::range(problem_.k()));
}

}  // namespace screenlab
