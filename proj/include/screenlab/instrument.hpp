#pragma once

// Closed-form flop accounting and per-iteration traces.
//
// Flops are never measured; they are recomputed from the active dictionary
// size and iterate sparsity that every trace record stores, so a trace can be
// re-audited after the fact.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "screenlab/problem.hpp"

namespace screenlab {

enum class Strategy { None, Static, Dynamic };

const char* to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

/// Flops of one iteration.
///   None:    (K + |x|_0) N + 4K + N                 (+3|G| for Group-Lasso)
///   Static:  (kept + |x|_0) N + 4 kept + N          (+3|G|)
///   Dynamic: (kept + |x|_0) N + 6 kept + 5N         (7 kept and +5|G| for Group-Lasso)
std::uint64_t flops_iteration(ProblemKind kind, Strategy strategy, std::uint64_t k,
                              std::uint64_t n, std::uint64_t kept, std::uint64_t sparsity,
                              std::uint64_t group_count);

/// One-off cost K N of the static test (computing D^T y).
std::uint64_t flops_static_init(std::uint64_t k, std::uint64_t n);

struct TraceRecord {
    std::size_t t = 0;
    std::size_t kept = 0;      // active dictionary size after screening at t
    std::size_t sparsity = 0;  // |x_t|_0
    double objective = 0.0;
    std::uint64_t flops_cum = 0;
    double seconds = 0.0;      // since the start of the run
};

struct SolveTrace {
    ProblemKind kind = ProblemKind::Lasso;
    Strategy strategy = Strategy::None;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t group_count = 0;
    std::uint64_t instance = 0;  // fingerprint of (D, y, lambda)
    std::vector<TraceRecord> records;

    /// Appends a record; the static init cost is folded into the first one.
    void push(std::size_t t, std::size_t kept, std::size_t sparsity, double objective,
              double seconds);

    std::uint64_t total_flops() const noexcept;
    double total_seconds() const noexcept;
};

/// Cumulative flops recomputed from the (kept, sparsity) columns.
std::vector<std::uint64_t> recompute_flops(const SolveTrace& trace);

/// recompute_flops(trace) equals the recorded column exactly.
bool flops_consistent(const SolveTrace& trace);

struct NormalizedMetrics {
    double flops_static = 0.0;   // flops_S / flops_N
    double flops_dynamic = 0.0;  // flops_D / flops_N
    double time_static = 0.0;    // t_S / t_N
    double time_dynamic = 0.0;   // t_D / t_N
};

/// Throws std::invalid_argument when the traces come from different instances
/// or carry the wrong strategies.
NormalizedMetrics normalized_metrics(const SolveTrace& none, const SolveTrace& stat,
                                     const SolveTrace& dyn);

/// FNV-1a over the bytes of D, y and lambda.
std::uint64_t instance_fingerprint(const Problem& p);

/// Header `t,kept,sparsity,objective,flops_cum,seconds`, preceded by
/// `# <config>` when config is non-empty.
void write_trace_csv(std::ostream& os, const SolveTrace& trace, std::string_view config = {});

}  // namespace screenlab
