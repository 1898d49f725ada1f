#include "screenlab/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "screenlab/kernels.hpp"

namespace screenlab {

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Ista: return "ista";
        case Algorithm::Fista: return "fista";
        case Algorithm::Twist: return "twist";
        case Algorithm::Sparsa: return "sparsa";
        case Algorithm::ChambollePock: return "cp";
    }
    return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
    if (name == "ista") return Algorithm::Ista;
    if (name == "fista") return Algorithm::Fista;
    if (name == "twist") return Algorithm::Twist;
    if (name == "sparsa") return Algorithm::Sparsa;
    if (name == "cp" || name == "chambolle-pock") return Algorithm::ChambollePock;
    return std::nullopt;
}

void SolverConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("SolverConfig: rel_tol must be > 0");
    if (!(L0 > 0.0)) throw std::invalid_argument("SolverConfig: L0 must be > 0");
    if (!(backtrack_factor > 1.0))
        throw std::invalid_argument("SolverConfig: backtrack_factor must be > 1");
    if (!(cp_gamma >= 0.0)) throw std::invalid_argument("SolverConfig: cp_gamma must be >= 0");
    if (!(cp_step_safety > 0.0 && cp_step_safety < 1.0))
        throw std::invalid_argument("SolverConfig: cp_step_safety must lie in (0, 1)");
    if (!(bb_L_min > 0.0 && bb_L_min <= bb_L_max))
        throw std::invalid_argument("SolverConfig: need 0 < bb_L_min <= bb_L_max");
}

TestKind SolverConfig::resolved_test(ProblemKind kind) const {
    if (test) return *test;
    return kind == ProblemKind::Lasso ? TestKind::Safe : TestKind::GroupSafe;
}

// ---------------------------------------------------------------------------
// ActiveProblem

ActiveProblem::ActiveProblem(const Problem& p)
    : kind_(p.kind()), d_(p.dictionary()), y_(&p.y()), lambda_(p.lambda()) {
    if (kind_ == ProblemKind::GroupLasso) {
        const auto& part = p.partition();
        for (std::size_t g = 0; g < part.size(); ++g) {
            groups_.push_back(part.group(g).indices());
            weights_.push_back(part.weight(g));
        }
    }
}

void ActiveProblem::prox(std::span<const double> v, double t, std::span<double> out) const {
    if (kind_ == ProblemKind::Lasso) {
        kernels::soft_threshold(v, t, out);
        return;
    }
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        double sq = 0.0;
        for (std::size_t i : groups_[g]) sq += v[i] * v[i];
        const double nrm = std::sqrt(sq);
        const double shrink = nrm == 0.0 ? 0.0 : std::max(0.0, (nrm - t * weights_[g]) / nrm);
        for (std::size_t i : groups_[g]) out[i] = shrink * v[i];
    }
}

double ActiveProblem::penalty(std::span<const double> x) const {
    double s = 0.0;
    if (kind_ == ProblemKind::Lasso) {
        for (double v : x) s += std::abs(v);
        return s;
    }
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        double sq = 0.0;
        for (std::size_t i : groups_[g]) sq += x[i] * x[i];
        s += weights_[g] * std::sqrt(sq);
    }
    return s;
}

double ActiveProblem::objective(std::span<const double> x, std::span<const double> dx) const {
    double r = 0.0;
    for (std::size_t i = 0; i < dx.size(); ++i) {
        const double d = dx[i] - (*y_)[i];
        r += d * d;
    }
    return 0.5 * r + lambda_ * penalty(x);
}

void ActiveProblem::retain(std::span<const std::size_t> positions) {
    if (kind_ == ProblemKind::GroupLasso) {
        constexpr std::size_t kDropped = static_cast<std::size_t>(-1);
        std::vector<std::size_t> remap(d_.cols(), kDropped);
        for (std::size_t k = 0; k < positions.size(); ++k) {
            if (positions[k] >= remap.size())
                throw std::invalid_argument("ActiveProblem::retain: position out of range");
            remap[positions[k]] = k;
        }
        std::vector<std::vector<std::size_t>> groups;
        std::vector<double> weights;
        for (std::size_t g = 0; g < groups_.size(); ++g) {
            const bool keep = remap[groups_[g].front()] != kDropped;
            for (std::size_t& i : groups_[g]) {
                if ((remap[i] != kDropped) != keep)
                    throw std::invalid_argument("ActiveProblem::retain: group split by screening");
                i = remap[i];
            }
            if (keep) {
                groups.push_back(std::move(groups_[g]));
                weights.push_back(weights_[g]);
            }
        }
        groups_ = std::move(groups);
        weights_ = std::move(weights);
    }
    d_.retain_columns(positions);
}

// ---------------------------------------------------------------------------
// Updates

namespace {

double half_sq_residual(std::span<const double> dx, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < dx.size(); ++i) {
        const double d = dx[i] - y[i];
        s += d * d;
    }
    return 0.5 * s;
}

// theta = dw - y, corr = D^T theta; returns 1/2 |theta|^2.
double dual_from(SolverState& s, const ActiveProblem& ap, std::span<const double> dw) {
    s.theta.resize(dw.size());
    for (std::size_t i = 0; i < dw.size(); ++i) s.theta[i] = dw[i] - ap.y()[i];
    s.corr.resize(ap.size());
    ap.dictionary().correlate_into(s.theta, s.corr);
    return 0.5 * kernels::sqnorm(s.theta);
}

// x_out = prox_{lambda/L}(w - g/L), with L increased until the quadratic model
// at w majorizes the smooth part at x_out.
StepInfo backtrack(const ActiveProblem& ap, const SolverConfig& cfg, std::span<const double> w,
                   std::span<const double> g, double f_w, double& L, Vector& x_out,
                   Vector& dx_out) {
    const std::size_t k = w.size();
    Vector z(k);
    x_out.assign(k, 0.0);
    dx_out.assign(ap.y().size(), 0.0);
    StepInfo info;
    for (std::size_t trial = 0;; ++trial) {
        for (std::size_t i = 0; i < k; ++i) z[i] = w[i] - g[i] / L;
        ap.prox(z, ap.lambda() / L, x_out);
        ap.dictionary().apply_sparse_into(x_out, dx_out);
        const double f_new = half_sq_residual(dx_out, ap.y());
        double lin = 0.0;
        double quad = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double d = x_out[i] - w[i];
            lin += g[i] * d;
            quad += d * d;
        }
        const double model = f_w + lin + 0.5 * L * quad;
        if (!std::isfinite(f_new) || !std::isfinite(model))
            throw SolverError("backtracking produced a non-finite value");
        if (f_new <= model + 1e-13 * std::max(1.0, std::abs(f_w))) {
            info.L = L;
            info.f_new = f_new;
            info.model = model;
            info.backtracks = trial;
            return info;
        }
        if (trial + 1 >= cfg.max_backtracks)
            throw SolverError("backtracking did not find an admissible step");
        L *= cfg.backtrack_factor;
    }
}

// out = a*p + b*q + c*r
void combine3(double a, std::span<const double> p, double b, std::span<const double> q, double c,
              std::span<const double> r, Vector& out) {
    out.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = a * p[i] + b * q[i] + c * r[i];
}

void extrapolate(std::span<const double> xn, std::span<const double> x, double coef, Vector& out) {
    out.resize(xn.size());
    for (std::size_t i = 0; i < xn.size(); ++i) out[i] = xn[i] + coef * (xn[i] - x[i]);
}

void advance(SolverState& s, Vector&& xn, Vector&& dxn) {
    s.x_prev = std::move(s.x);
    s.dx_prev = std::move(s.dx);
    s.x = std::move(xn);
    s.dx = std::move(dxn);
    ++s.iteration;
}

}  // namespace

SolverState init_state(const ActiveProblem& ap, const SolverConfig& cfg, double dict_norm) {
    const std::size_t k = ap.size();
    const std::size_t n = ap.y().size();
    SolverState s;
    s.x.assign(k, 0.0);
    s.x_prev.assign(k, 0.0);
    s.u.assign(k, 0.0);
    s.dx.assign(n, 0.0);
    s.dx_prev.assign(n, 0.0);
    s.du.assign(n, 0.0);
    s.theta.assign(n, 0.0);
    s.corr.assign(k, 0.0);
    s.L = cfg.L0;
    s.l = 1.0;
    if (cfg.algorithm == Algorithm::Twist || cfg.algorithm == Algorithm::ChambollePock) {
        if (!(dict_norm > 0.0)) throw std::invalid_argument("init_state: |D| must be positive");
        s.step_lipschitz = dict_norm * dict_norm;
        s.tau = s.sigma = cfg.cp_step_safety / dict_norm;
    }
    return s;
}

StepInfo update_ista(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg) {
    const double f = dual_from(s, ap, s.dx);
    Vector xn, dxn;
    StepInfo info = backtrack(ap, cfg, s.x, s.corr, f, s.L, xn, dxn);
    advance(s, std::move(xn), std::move(dxn));
    return info;
}

StepInfo update_fista(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg) {
    const double f = dual_from(s, ap, s.du);
    Vector xn, dxn;
    StepInfo info = backtrack(ap, cfg, s.u, s.corr, f, s.L, xn, dxn);
    const double l_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * s.l * s.l));
    const double coef = (s.l - 1.0) / l_next;
    extrapolate(xn, s.x, coef, s.u);
    extrapolate(dxn, s.dx, coef, s.du);
    s.l = l_next;
    advance(s, std::move(xn), std::move(dxn));
    return info;
}

StepInfo update_twist(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg) {
    dual_from(s, ap, s.dx);
    const double L = s.step_lipschitz;
    const std::size_t k = ap.size();
    Vector z(k), pz(k), dz(ap.y().size());
    for (std::size_t i = 0; i < k; ++i) z[i] = s.x[i] - s.corr[i] / L;
    ap.prox(z, ap.lambda() / L, pz);
    ap.dictionary().apply_sparse_into(pz, dz);
    const double a = cfg.twist_alpha;
    const double b = cfg.twist_beta;
    Vector xn, dxn;
    combine3(1.0 - a, s.x_prev, a - b, s.x, b, pz, xn);
    combine3(1.0 - a, s.dx_prev, a - b, s.dx, b, dz, dxn);
    StepInfo info;
    info.f_new = half_sq_residual(dxn, ap.y());
    if (!std::isfinite(info.f_new)) throw SolverError("TwIST produced a non-finite iterate");
    advance(s, std::move(xn), std::move(dxn));
    return info;
}

StepInfo update_sparsa(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg) {
    if (s.iteration > 0) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < s.dx.size(); ++i) {
            const double d = s.dx[i] - s.dx_prev[i];
            num += d * d;
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double d = s.x[i] - s.x_prev[i];
            den += d * d;
        }
        if (den > 0.0) s.L = std::clamp(num / den, cfg.bb_L_min, cfg.bb_L_max);
    }
    return update_ista(s, ap, cfg);
}

StepInfo update_cp(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg) {
    const std::size_t n = ap.y().size();
    const std::size_t k = ap.size();
    for (std::size_t i = 0; i < n; ++i)
        s.theta[i] = (s.theta[i] + s.sigma * (s.du[i] - ap.y()[i])) / (1.0 + s.sigma);
    s.corr.resize(k);
    ap.dictionary().correlate_into(s.theta, s.corr);
    Vector z(k), xn(k), dxn(n);
    for (std::size_t i = 0; i < k; ++i) z[i] = s.x[i] - s.tau * s.corr[i];
    ap.prox(z, ap.lambda() * s.tau, xn);
    ap.dictionary().apply_sparse_into(xn, dxn);
    const double phi = 1.0 / std::sqrt(1.0 + 2.0 * cfg.cp_gamma * s.tau);
    s.tau *= phi;
    s.sigma /= phi;
    extrapolate(xn, s.x, phi, s.u);
    extrapolate(dxn, s.dx, phi, s.du);
    StepInfo info;
    info.f_new = half_sq_residual(dxn, ap.y());
    if (!std::isfinite(info.f_new) || !std::isfinite(s.sigma))
        throw SolverError("Chambolle-Pock produced a non-finite iterate");
    advance(s, std::move(xn), std::move(dxn));
    return info;
}

StepInfo update(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg) {
    switch (cfg.algorithm) {
        case Algorithm::Ista: return update_ista(s, ap, cfg);
        case Algorithm::Fista: return update_fista(s, ap, cfg);
        case Algorithm::Twist: return update_twist(s, ap, cfg);
        case Algorithm::Sparsa: return update_sparsa(s, ap, cfg);
        case Algorithm::ChambollePock: return update_cp(s, ap, cfg);
    }
    throw std::invalid_argument("update: unknown algorithm");
}

namespace {

// Compacts v to `positions`; returns true if a dropped entry was nonzero.
bool compact(Vector& v, std::span<const std::size_t> positions) {
    bool dropped_nonzero = false;
    std::size_t next = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (next < positions.size() && positions[next] == j) {
            v[next++] = v[j];
        } else if (v[j] != 0.0) {
            dropped_nonzero = true;
        }
    }
    v.resize(positions.size());
    return dropped_nonzero;
}

}  // namespace

void reduce_state(SolverState& s, const ActiveProblem& ap, std::span<const std::size_t> positions) {
    const Dictionary& d = ap.dictionary();
    if (d.cols() != positions.size())
        throw DimensionError("reduce_state: dictionary was not reduced to `positions`");
    if (compact(s.x, positions)) d.apply_sparse_into(s.x, s.dx);
    if (compact(s.x_prev, positions)) d.apply_sparse_into(s.x_prev, s.dx_prev);
    if (compact(s.u, positions)) d.apply_sparse_into(s.u, s.du);
}

// ---------------------------------------------------------------------------
// Driver

namespace {

std::vector<std::size_t> unscreened_positions(const Mask& mask) {
    std::vector<std::size_t> pos;
    pos.reserve(mask.size());
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (!mask[k]) pos.push_back(k);
    return pos;
}

std::size_t count_nonzero(std::span<const double> x) {
    return static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [](double v) { return v != 0.0; }));
}

}  // namespace

SolveResult run(const Problem& p, const SolverConfig& cfg, const Observer& observer) {
    cfg.validate();
    const TestKind test = cfg.resolved_test(p.kind());
    if (cfg.strategy != Strategy::None && !test_matches_problem(test, p.kind()))
        throw std::invalid_argument(std::string("test '") + to_string(test) +
                                    "' does not apply to a " + to_string(p.kind()) + " problem");

    SolveResult res;
    res.trace.kind = p.kind();
    res.trace.strategy = cfg.strategy;
    res.trace.n = p.n();
    res.trace.k = p.k();
    res.trace.group_count = p.kind() == ProblemKind::GroupLasso ? p.partition().size() : 0;
    res.trace.instance = instance_fingerprint(p);

    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

    const ExtremeDual ed = extreme_dual(p);
    res.lambda_star = ed.lambda_star;
    res.screen = ScreenState::initial(p.k(), test);
    if (p.lambda() > ed.lambda_star) {
        res.screen = ScreenState{IndexSet::range(p.k()), IndexSet{}, test};
        res.x_star.assign(p.k(), 0.0);
        res.final_objective = objective(p, res.x_star);
        return res;
    }

    ActiveProblem ap(p);
    std::optional<Screener> screener;
    if (cfg.strategy != Strategy::None) screener.emplace(p, test);
    if (cfg.strategy == Strategy::Static) {
        const auto step = screener->evaluate_static();
        res.screen = screen_update(res.screen, step.mask);
        ap.retain(unscreened_positions(step.mask));
    }

    double dict_norm = 0.0;
    if (cfg.algorithm == Algorithm::Twist || cfg.algorithm == Algorithm::ChambollePock)
        dict_norm = spectral_norm(p.dictionary());
    SolverState s = init_state(ap, cfg, dict_norm);

    double f_prev = ap.objective(s.x, s.dx);
    res.final_objective = f_prev;
    IndexSet kept_before;
    Vector theta_prev = s.theta;
    for (std::size_t t = 1; t <= cfg.max_iters && ap.size() > 0; ++t) {
        if (observer) kept_before = res.screen.kept;
        const StepInfo info = update(s, ap, cfg);

        std::optional<Screener::Step> step;
        if (cfg.strategy == Strategy::Dynamic) {
            step = screener->evaluate(s.theta, s.corr, res.screen.kept);
            const std::size_t before = res.screen.kept.size();
            res.screen = screen_update(res.screen, step->mask);
            if (res.screen.kept.size() != before) {
                const auto pos = unscreened_positions(step->mask);
                ap.retain(pos);
                reduce_state(s, ap, pos);
            }
        }

        const double f = ap.objective(s.x, s.dx);
        if (!std::isfinite(f)) throw SolverError("objective is not finite");
        res.trace.push(t, ap.size(), count_nonzero(s.x), f, elapsed());
        res.iterations = t;
        res.final_objective = f;
        if (observer) {
            const IterationEvent ev{t,    s, info, kept_before, step ? &*step : nullptr,
                                    res.screen.kept, f};
            observer(ev);
        }
        // A primal iterate that has not moved while the dual point did says
        // nothing about convergence (Chambolle-Pock warm-up).
        const bool stalled_primal = s.x == s.x_prev && s.theta != theta_prev;
        if (!stalled_primal && std::abs(f_prev - f) / f < cfg.rel_tol) break;
        f_prev = f;
        theta_prev = s.theta;
    }
    res.x_star = expand(s.x, res.screen.kept, p.k());
    return res;
}

}  // namespace screenlab
