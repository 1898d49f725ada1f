#include "screenlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace screenlab {

namespace {

// Plain loops on purpose: the oracle must not share kernels with the solvers.
double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double soft(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

struct Certificate {
    Vector theta;
    double primal = 0.0;
    double gap = 0.0;
};

// Scales the residual r = y - D x onto the dual feasible set and evaluates the
// gap of (x, theta).
Certificate certify(const Problem& p, const Dictionary& d, std::span<const double> x,
                    std::span<const double> r) {
    const std::size_t k = d.cols();
    Vector c(k);
    for (std::size_t j = 0; j < k; ++j) c[j] = dot(d.column(j), r);
    double scale = p.lambda();
    double pen = 0.0;
    if (p.kind() == ProblemKind::Lasso) {
        for (std::size_t j = 0; j < k; ++j) {
            scale = std::max(scale, std::abs(c[j]));
            pen += std::abs(x[j]);
        }
    } else {
        const auto& part = p.partition();
        for (std::size_t g = 0; g < part.size(); ++g) {
            double cs = 0.0;
            double xs = 0.0;
            for (std::size_t i : part.group(g)) {
                cs += c[i] * c[i];
                xs += x[i] * x[i];
            }
            scale = std::max(scale, std::sqrt(cs) / part.weight(g));
            pen += part.weight(g) * std::sqrt(xs);
        }
    }
    Certificate cert;
    cert.theta.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) cert.theta[i] = r[i] / scale;
    const double rr = dot(r, r);
    cert.primal = 0.5 * rr + p.lambda() * pen;
    const double lam = p.lambda();
    double dist = 0.0;
    double yy = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = cert.theta[i] - p.y()[i] / lam;
        dist += d * d;
        yy += p.y()[i] * p.y()[i];
    }
    cert.gap = cert.primal - (0.5 * yy - 0.5 * lam * lam * dist);
    return cert;
}

void lasso_sweep(const Problem& p, const Dictionary& d, const Vector& sq, Vector& x, Vector& r) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
        if (sq[j] == 0.0) continue;
        const auto a = d.column(j);
        const double z = dot(a, r) + sq[j] * x[j];
        const double xn = soft(z, p.lambda()) / sq[j];
        const double delta = xn - x[j];
        if (delta == 0.0) continue;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= delta * a[i];
        x[j] = xn;
    }
}

void group_sweep(const Problem& p, const Dictionary& d, Vector& x, Vector& r) {
    const auto& part = p.partition();
    Vector z;
    for (std::size_t g = 0; g < part.size(); ++g) {
        const auto& idx = part.group(g);
        const double L = part.spectral_norm(g) * part.spectral_norm(g);
        if (L == 0.0) continue;
        z.assign(idx.size(), 0.0);
        double zn = 0.0;
        for (std::size_t m = 0; m < idx.size(); ++m) {
            z[m] = x[idx[m]] + dot(d.column(idx[m]), r) / L;
            zn += z[m] * z[m];
        }
        zn = std::sqrt(zn);
        const double t = p.lambda() * part.weight(g) / L;
        const double shrink = zn > t ? (zn - t) / zn : 0.0;
        for (std::size_t m = 0; m < idx.size(); ++m) {
            const double xn = shrink * z[m];
            const double delta = xn - x[idx[m]];
            if (delta == 0.0) continue;
            const auto a = d.column(idx[m]);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= delta * a[i];
            x[idx[m]] = xn;
        }
    }
}

}  // namespace

OracleResult solve_reference(const Problem& p, double gap_tol, std::size_t max_sweeps) {
    if (!(gap_tol > 0.0)) throw std::invalid_argument("solve_reference: gap_tol must be > 0");
    const Dictionary& d = p.dictionary();
    const std::size_t k = d.cols();
    Vector x(k, 0.0);
    Vector r = p.y();
    Vector sq(k);
    for (std::size_t j = 0; j < k; ++j) sq[j] = dot(d.column(j), d.column(j));

    const auto refresh_residual = [&] {
        r = p.y();
        for (std::size_t j = 0; j < k; ++j)
            if (x[j] != 0.0)
                for (std::size_t i = 0; i < r.size(); ++i) r[i] -= x[j] * d(i, j);
    };

    OracleResult res;
    for (std::size_t sweep = 0;; ++sweep) {
        Certificate cert = certify(p, d, x, r);
        if (cert.gap <= gap_tol) {
            // Certify on an exactly recomputed residual, not the running one.
            refresh_residual();
            cert = certify(p, d, x, r);
        }
        if (cert.gap <= gap_tol) {
            res.x_ref = std::move(x);
            res.theta = std::move(cert.theta);
            res.gap = std::max(0.0, cert.gap);
            res.objective = cert.primal;
            res.sweeps = sweep;
            std::vector<std::size_t> support;
            for (std::size_t j = 0; j < k; ++j)
                if (std::abs(res.x_ref[j]) > kSupportEps) support.push_back(j);
            res.support = IndexSet(std::move(support));
            return res;
        }
        if (sweep == max_sweeps)
            throw OracleError("solve_reference: gap " + std::to_string(cert.gap) +
                              " above tolerance after " + std::to_string(max_sweeps) + " sweeps");
        if (p.kind() == ProblemKind::Lasso) lasso_sweep(p, d, sq, x, r);
        else
            group_sweep(p, d, x, r);
        if (sweep % 64 == 63) refresh_residual();
    }
}

bool verify_screen_safety(const Problem& p, const ScreenState& state, const OracleResult& ref) {
    if (ref.x_ref.size() != p.k()) throw DimensionError("verify_screen_safety: x_ref has wrong length");
    return std::all_of(state.eliminated.begin(), state.eliminated.end(),
                       [&](std::size_t i) { return std::abs(ref.x_ref[i]) <= kSupportEps; });
}

}  // namespace screenlab
