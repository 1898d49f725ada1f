#pragma once

// First-order solvers with optional static or dynamic screening.
//
// Each update_* function performs one iteration on the reduced problem held by
// an ActiveProblem. run() drives the loop: update, screen with the dual point
// the update produced, then shrink the dictionary and every primal buffer with
// the same index map.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "screenlab/dictionary.hpp"
#include "screenlab/instrument.hpp"
#include "screenlab/problem.hpp"
#include "screenlab/screening.hpp"

namespace screenlab {

enum class Algorithm { Ista, Fista, Twist, Sparsa, ChambollePock };

const char* to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Raised when an iterate or step size stops being finite.
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    Algorithm algorithm = Algorithm::Ista;
    Strategy strategy = Strategy::None;
    /// Defaults to SAFE or GSAFE according to the problem kind.
    std::optional<TestKind> test;
    std::size_t max_iters = 200;
    double rel_tol = 1e-7;
    double L0 = 1.0;
    double backtrack_factor = 2.0;
    std::size_t max_backtracks = 100;
    double twist_alpha = 1.78;
    double twist_beta = 1.78;
    double cp_gamma = 0.0;
    double cp_step_safety = 0.99;
    double bb_L_min = 1e-10;
    double bb_L_max = 1e10;

    /// Throws std::invalid_argument on out-of-range knobs.
    void validate() const;
    TestKind resolved_test(ProblemKind kind) const;
};

/// The problem restricted to the kept columns, with groups in local positions.
class ActiveProblem {
  public:
    explicit ActiveProblem(const Problem& p);

    ProblemKind kind() const noexcept { return kind_; }
    const Dictionary& dictionary() const noexcept { return d_; }
    const Vector& y() const noexcept { return *y_; }
    double lambda() const noexcept { return lambda_; }
    std::size_t size() const noexcept { return d_.cols(); }
    std::size_t group_count() const noexcept { return groups_.size(); }

    /// out = prox of t * Omega at v.
    void prox(std::span<const double> v, double t, std::span<double> out) const;
    double penalty(std::span<const double> x) const;
    /// 1/2 |dx - y|^2 + lambda Omega(x) given dx = D x.
    double objective(std::span<const double> x, std::span<const double> dx) const;

    /// Keep the columns at the given local positions. Groups must be kept or
    /// dropped whole.
    void retain(std::span<const std::size_t> positions);

  private:
    ProblemKind kind_;
    Dictionary d_;
    const Vector* y_;
    double lambda_;
    std::vector<std::vector<std::size_t>> groups_;
    std::vector<double> weights_;
};

/// Primal buffers have length |kept|; products with D have length N.
struct SolverState {
    Vector x;
    Vector x_prev;
    Vector u;        // FISTA extrapolation, Chambolle-Pock over-relaxation
    Vector dx;       // D x
    Vector dx_prev;  // D x_prev
    Vector du;       // D u
    Vector theta;    // dual point of the last update
    Vector corr;     // D^T theta on the columns the last update used
    double L = 1.0;
    double l = 1.0;
    double tau = 0.0;
    double sigma = 0.0;
    double step_lipschitz = 0.0;  // |D|^2, TwIST step
    std::size_t iteration = 0;
};

/// Starts every algorithm from x = 0 (and theta = 0 for Chambolle-Pock).
/// `dict_norm` is |D|_2; needed by TwIST and Chambolle-Pock only.
SolverState init_state(const ActiveProblem& ap, const SolverConfig& cfg, double dict_norm);

/// Diagnostics of one update.
struct StepInfo {
    double L = 0.0;            // accepted backtracking estimate (0 when not backtracking)
    double f_new = 0.0;        // smooth part at the new point
    double model = 0.0;        // majorizer Q_L at the new point
    std::size_t backtracks = 0;
};

StepInfo update_ista(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg);
StepInfo update_fista(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg);
StepInfo update_twist(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg);
StepInfo update_sparsa(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg);
StepInfo update_cp(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg);
StepInfo update(SolverState& s, const ActiveProblem& ap, const SolverConfig& cfg);

/// Shrink all primal buffers to `positions` (local, strictly increasing) after
/// `ap` has already been reduced. Cached products are refreshed only when a
/// dropped coordinate was nonzero.
void reduce_state(SolverState& s, const ActiveProblem& ap, std::span<const std::size_t> positions);

/// Everything the observer may inspect after iteration t.
struct IterationEvent {
    std::size_t t;
    const SolverState& state;
    const StepInfo& step;
    const IndexSet& kept_before;        // columns used by the update
    const Screener::Step* screen;       // nullptr unless the strategy is dynamic
    const IndexSet& kept_after;
    double objective;
};

using Observer = std::function<void(const IterationEvent&)>;

struct SolveResult {
    Vector x_star;  // length K
    std::size_t iterations = 0;
    SolveTrace trace;
    double final_objective = 0.0;
    ScreenState screen;
    double lambda_star = 0.0;
};

SolveResult run(const Problem& p, const SolverConfig& cfg, const Observer& observer = {});

}  // namespace screenlab
