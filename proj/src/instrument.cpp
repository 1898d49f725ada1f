#include "screenlab/instrument.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace screenlab {

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::None: return "none";
        case Strategy::Static: return "static";
        case Strategy::Dynamic: return "dynamic";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
    if (name == "none") return Strategy::None;
    if (name == "static") return Strategy::Static;
    if (name == "dynamic") return Strategy::Dynamic;
    return std::nullopt;
}

std::uint64_t flops_iteration(ProblemKind kind, Strategy strategy, std::uint64_t k,
                              std::uint64_t n, std::uint64_t kept, std::uint64_t sparsity,
                              std::uint64_t group_count) {
    const bool group = kind == ProblemKind::GroupLasso;
    switch (strategy) {
        case Strategy::None:
            return (k + sparsity) * n + 4 * k + n + (group ? 3 * group_count : 0);
        case Strategy::Static:
            return (kept + sparsity) * n + 4 * kept + n + (group ? 3 * group_count : 0);
        case Strategy::Dynamic:
            return (kept + sparsity) * n + (group ? 7 : 6) * kept + 5 * n +
                   (group ? 5 * group_count : 0);
    }
    throw std::invalid_argument("flops_iteration: unknown strategy");
}

std::uint64_t flops_static_init(std::uint64_t k, std::uint64_t n) { return k * n; }

void SolveTrace::push(std::size_t t, std::size_t kept, std::size_t sparsity, double objective,
                      double seconds) {
    std::uint64_t prev = records.empty() ? 0 : records.back().flops_cum;
    if (records.empty() && strategy == Strategy::Static) prev = flops_static_init(k, n);
    const std::uint64_t f = flops_iteration(kind, strategy, k, n, kept, sparsity, group_count);
    records.push_back(TraceRecord{t, kept, sparsity, objective, prev + f, seconds});
}

std::uint64_t SolveTrace::total_flops() const noexcept {
    return records.empty() ? 0 : records.back().flops_cum;
}

double SolveTrace::total_seconds() const noexcept {
    return records.empty() ? 0.0 : records.back().seconds;
}

std::vector<std::uint64_t> recompute_flops(const SolveTrace& trace) {
    std::vector<std::uint64_t> out;
    out.reserve(trace.records.size());
    std::uint64_t acc =
        trace.strategy == Strategy::Static ? flops_static_init(trace.k, trace.n) : 0;
    for (const auto& r : trace.records) {
        acc += flops_iteration(trace.kind, trace.strategy, trace.k, trace.n, r.kept, r.sparsity,
                               trace.group_count);
        out.push_back(acc);
    }
    return out;
}

bool flops_consistent(const SolveTrace& trace) {
    const auto ref = recompute_flops(trace);
    for (std::size_t i = 0; i < ref.size(); ++i)
        if (ref[i] != trace.records[i].flops_cum) return false;
    return true;
}

NormalizedMetrics normalized_metrics(const SolveTrace& none, const SolveTrace& stat,
                                     const SolveTrace& dyn) {
    if (none.strategy != Strategy::None || stat.strategy != Strategy::Static ||
        dyn.strategy != Strategy::Dynamic)
        throw std::invalid_argument("normalized_metrics: expected none/static/dynamic traces");
    for (const SolveTrace* t : {&stat, &dyn}) {
        if (t->instance != none.instance || t->n != none.n || t->k != none.k ||
            t->kind != none.kind)
            throw std::invalid_argument("normalized_metrics: traces come from different instances");
    }
    const double fn = static_cast<double>(none.total_flops());
    const double tn = none.total_seconds();
    if (fn <= 0.0 || tn <= 0.0)
        throw std::invalid_argument("normalized_metrics: baseline run is empty");
    return NormalizedMetrics{static_cast<double>(stat.total_flops()) / fn,
                             static_cast<double>(dyn.total_flops()) / fn,
                             stat.total_seconds() / tn, dyn.total_seconds() / tn};
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= b[i];
        h *= kFnvPrime;
    }
}

}  // namespace

std::uint64_t instance_fingerprint(const Problem& p) {
    std::uint64_t h = kFnvOffset;
    const auto data = p.dictionary().data();
    fnv_bytes(h, data.data(), data.size_bytes());
    fnv_bytes(h, p.y().data(), p.y().size() * sizeof(double));
    const double lam = p.lambda();
    fnv_bytes(h, &lam, sizeof lam);
    return h;
}

void write_trace_csv(std::ostream& os, const SolveTrace& trace, std::string_view config) {
    if (!config.empty()) os << "# " << config << '\n';
    os << "t,kept,sparsity,objective,flops_cum,seconds\n";
    os << std::setprecision(17);
    for (const auto& r : trace.records) {
        os << r.t << ',' << r.kept << ',' << r.sparsity << ',' << r.objective << ','
           << r.flops_cum << ',' << r.seconds << '\n';
    }
}

}  // namespace screenlab
