#include "screenlab/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "screenlab/kernels.hpp"

namespace screenlab {

const char* to_string(ProblemKind kind) {
    return kind == ProblemKind::Lasso ? "lasso" : "group-lasso";
}

Problem::Problem(ProblemKind kind, std::shared_ptr<const Dictionary> d,
                 std::shared_ptr<const GroupPartition> partition, Vector y, double lambda)
    : kind_(kind), dict_(std::move(d)), partition_(std::move(partition)), y_(std::move(y)),
      lambda_(lambda) {
    if (!dict_) throw std::invalid_argument("Problem: null dictionary");
    if (y_.size() != dict_->rows()) throw DimensionError("Problem: y must have N entries");
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_))
        throw std::invalid_argument("Problem: lambda must be positive");
    const double ny = std::sqrt(kernels::sqnorm(y_));
    if (std::abs(ny - 1.0) > kUnitNormTolerance)
        throw std::invalid_argument("Problem: y must have unit l2 norm");
    if (kind_ == ProblemKind::GroupLasso) {
        if (!partition_) throw std::invalid_argument("Problem: Group-Lasso needs a partition");
        if (partition_->universe() != dict_->cols())
            throw DimensionError("Problem: partition does not cover the dictionary");
    }
}

Problem Problem::lasso(std::shared_ptr<const Dictionary> d, Vector y, double lambda) {
    return Problem(ProblemKind::Lasso, std::move(d), nullptr, std::move(y), lambda);
}

Problem Problem::group_lasso(std::shared_ptr<const Dictionary> d,
                             std::shared_ptr<const GroupPartition> partition, Vector y,
                             double lambda) {
    return Problem(ProblemKind::GroupLasso, std::move(d), std::move(partition), std::move(y),
                   lambda);
}

const GroupPartition& Problem::partition() const {
    if (!partition_) throw std::logic_error("Problem: no partition on a Lasso problem");
    return *partition_;
}

Problem Problem::with_lambda(double lambda) const {
    return Problem(kind_, dict_, partition_, y_, lambda);
}

ExtremeDual extreme_dual(const Problem& p) {
    const Vector corr = p.dictionary().correlate(p.y());
    ExtremeDual ed;
    if (p.kind() == ProblemKind::Lasso) {
        for (std::size_t i = 0; i < corr.size(); ++i) {
            if (std::abs(corr[i]) > ed.lambda_star) {
                ed.lambda_star = std::abs(corr[i]);
                ed.star_index = i;
            }
        }
        const auto col = p.dictionary().column(ed.star_index);
        const double s = corr[ed.star_index] < 0.0 ? -1.0 : 1.0;
        ed.star_atom.assign(col.begin(), col.end());
        for (double& v : ed.star_atom) v *= s;
    } else {
        const auto& part = p.partition();
        for (std::size_t g = 0; g < part.size(); ++g) {
            double sq = 0.0;
            for (std::size_t i : part.group(g)) sq += corr[i] * corr[i];
            const double v = std::sqrt(sq) / part.weight(g);
            if (v > ed.lambda_star) {
                ed.lambda_star = v;
                ed.star_index = g;
            }
        }
    }
    return ed;
}

double penalty(const Problem& p, std::span<const double> x) {
    if (x.size() != p.k()) throw DimensionError("penalty: x must have K entries");
    if (p.kind() == ProblemKind::Lasso) {
        double s = 0.0;
        for (double v : x) s += std::abs(v);
        return s;
    }
    const auto& part = p.partition();
    double s = 0.0;
    for (std::size_t g = 0; g < part.size(); ++g) {
        double sq = 0.0;
        for (std::size_t i : part.group(g)) sq += x[i] * x[i];
        s += part.weight(g) * std::sqrt(sq);
    }
    return s;
}

double objective(const Problem& p, std::span<const double> x) {
    if (x.size() != p.k()) throw DimensionError("objective: x must have K entries");
    Vector r = p.dictionary().apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= p.y()[i];
    return 0.5 * kernels::sqnorm(r) + p.lambda() * penalty(p, x);
}

Vector prox_l1(std::span<const double> x, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("prox_l1: threshold must be >= 0");
    Vector out(x.size());
    kernels::soft_threshold(x, t, out);
    return out;
}

Vector prox_group(std::span<const double> x, double t, const GroupPartition& partition) {
    if (!(t >= 0.0)) throw std::invalid_argument("prox_group: threshold must be >= 0");
    if (x.size() != partition.universe()) throw DimensionError("prox_group: length mismatch");
    Vector out(x.size(), 0.0);
    for (std::size_t g = 0; g < partition.size(); ++g) {
        double sq = 0.0;
        for (std::size_t i : partition.group(g)) sq += x[i] * x[i];
        const double nrm = std::sqrt(sq);
        if (nrm == 0.0) continue;
        const double shrink = std::max(0.0, (nrm - t * partition.weight(g)) / nrm);
        for (std::size_t i : partition.group(g)) out[i] = shrink * x[i];
    }
    return out;
}

double dual_objective(const Problem& p, std::span<const double> theta) {
    if (theta.size() != p.n()) throw DimensionError("dual_objective: theta must have N entries");
    const double lam = p.lambda();
    double dist = 0.0;
    double yy = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double d = theta[i] - p.y()[i] / lam;
        dist += d * d;
        yy += p.y()[i] * p.y()[i];
    }
    return 0.5 * yy - 0.5 * lam * lam * dist;
}

bool dual_feasible(const Problem& p, std::span<const double> theta, double tol) {
    if (theta.size() != p.n()) throw DimensionError("dual_feasible: theta must have N entries");
    const Vector corr = p.dictionary().correlate(theta);
    if (p.kind() == ProblemKind::Lasso) {
        return std::all_of(corr.begin(), corr.end(),
                           [tol](double c) { return std::abs(c) <= 1.0 + tol; });
    }
    const auto& part = p.partition();
    for (std::size_t g = 0; g < part.size(); ++g) {
        double sq = 0.0;
        for (std::size_t i : part.group(g)) sq += corr[i] * corr[i];
        if (std::sqrt(sq) / part.weight(g) > 1.0 + tol) return false;
    }
    return true;
}

double duality_gap(const Problem& p, std::span<const double> x, std::span<const double> theta) {
    if (!dual_feasible(p, theta))
        throw std::invalid_argument("duality_gap: theta is not dual feasible");
    const double gap = objective(p, x) - dual_objective(p, theta);
    if (gap < 0.0) {
        if (gap >= -1e-12) return 0.0;
        throw std::logic_error("duality_gap: negative gap " + std::to_string(gap));
    }
    return gap;
}

Vector expand(std::span<const double> x_reduced, const IndexSet& kept, std::size_t k) {
    if (x_reduced.size() != kept.size()) throw DimensionError("expand: length mismatch");
    if (!kept.empty() && kept.indices().back() >= k)
        throw DimensionError("expand: kept index out of range");
    Vector out(k, 0.0);
    for (std::size_t j = 0; j < kept.size(); ++j) out[kept[j]] = x_reduced[j];
    return out;
}

}  // namespace screenlab
