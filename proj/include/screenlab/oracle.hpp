#pragma once

// Slow reference solver used to certify the fast solvers and the screening
// tests. It shares no code with the first-order solvers beyond the problem
// definition: cyclic coordinate descent (Lasso) or block coordinate proximal
// descent (Group-Lasso), stopped on a certified duality gap.

#include <cstddef>
#include <stdexcept>

#include "screenlab/dictionary.hpp"
#include "screenlab/problem.hpp"
#include "screenlab/screening.hpp"

namespace screenlab {

inline constexpr double kSupportEps = 1e-9;

class OracleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct OracleResult {
    Vector x_ref;        // length K
    Vector theta;        // feasible dual point certifying the gap
    double gap = 0.0;
    double objective = 0.0;
    IndexSet support;    // |x_ref[i]| > kSupportEps
    std::size_t sweeps = 0;
};

/// Throws std::invalid_argument unless gap_tol > 0, OracleError if the sweep
/// cap is reached first.
OracleResult solve_reference(const Problem& p, double gap_tol, std::size_t max_sweeps = 1000000);

/// True iff every eliminated index has |x_ref| <= kSupportEps.
bool verify_screen_safety(const Problem& p, const ScreenState& state, const OracleResult& ref);

}  // namespace screenlab
