#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>

#include "screenlab/dictionary.hpp"

namespace screenlab {

enum class ProblemKind { Lasso, GroupLasso };

const char* to_string(ProblemKind kind);

/// min_x 1/2 |D x - y|^2 + lambda * Omega(x), with Omega the l1 norm (Lasso)
/// or the weighted sum of group l2 norms (Group-Lasso).
///
/// The dictionary and partition are shared immutable values so that many
/// solves can run against the same data.
class Problem {
  public:
    static constexpr double kUnitNormTolerance = 1e-9;

    static Problem lasso(std::shared_ptr<const Dictionary> d, Vector y, double lambda);
    static Problem group_lasso(std::shared_ptr<const Dictionary> d,
                               std::shared_ptr<const GroupPartition> partition, Vector y,
                               double lambda);

    ProblemKind kind() const noexcept { return kind_; }
    const Dictionary& dictionary() const noexcept { return *dict_; }
    const std::shared_ptr<const Dictionary>& dictionary_ptr() const noexcept { return dict_; }
    const GroupPartition& partition() const;
    const std::shared_ptr<const GroupPartition>& partition_ptr() const noexcept {
        return partition_;
    }
    const Vector& y() const noexcept { return y_; }
    double lambda() const noexcept { return lambda_; }
    std::size_t n() const noexcept { return dict_->rows(); }
    std::size_t k() const noexcept { return dict_->cols(); }

    /// Same data with another regularization value.
    Problem with_lambda(double lambda) const;

  private:
    Problem(ProblemKind kind, std::shared_ptr<const Dictionary> d,
            std::shared_ptr<const GroupPartition> partition, Vector y, double lambda);

    ProblemKind kind_;
    std::shared_ptr<const Dictionary> dict_;
    std::shared_ptr<const GroupPartition> partition_;
    Vector y_;
    double lambda_;
};

/// Largest lambda for which the zero vector is not optimal, with the atom
/// (Lasso) or group (Group-Lasso) attaining it.
struct ExtremeDual {
    double lambda_star = 0.0;
    std::size_t star_index = 0;  // Lasso: column of a_*, Group-Lasso: g_*
    Vector star_atom;            // Lasso only: sign(a_i^T y) a_i, so star_atom^T y >= 0
};

ExtremeDual extreme_dual(const Problem& p);

/// Omega(x) for a full-length x.
double penalty(const Problem& p, std::span<const double> x);

/// F(x) = 1/2 |D x - y|^2 + lambda Omega(x) for a full-length x.
double objective(const Problem& p, std::span<const double> x);

/// Componentwise sign(x) max(|x| - t, 0).
Vector prox_l1(std::span<const double> x, double t);

/// Group soft-thresholding: each block x_g shrinks by max(0, 1 - t w_g / |x_g|).
Vector prox_group(std::span<const double> x, double t, const GroupPartition& partition);

/// 1/2 |y|^2 - lambda^2/2 |theta - y/lambda|^2
double dual_objective(const Problem& p, std::span<const double> theta);

inline constexpr double kFeasibilityTolerance = 1e-12;

/// |a_i^T theta| <= 1 + tol for all i (Lasso) or |D_g^T theta| / w_g <= 1 + tol
/// for all g (Group-Lasso).
bool dual_feasible(const Problem& p, std::span<const double> theta,
                   double tol = kFeasibilityTolerance);

/// F(x) - dual_objective(theta). Throws std::invalid_argument if theta is not
/// dual feasible (within kFeasibilityTolerance). Values in [-1e-12, 0) are
/// rounded to 0.
double duality_gap(const Problem& p, std::span<const double> x, std::span<const double> theta);

/// Scatter x_reduced into a zero vector of length k at the positions in kept.
Vector expand(std::span<const double> x_reduced, const IndexSet& kept, std::size_t k);

}  // namespace screenlab
