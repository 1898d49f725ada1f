#pragma once

// Safe screening tests evaluated at an arbitrary dual point theta.
//
// Every test follows the same recipe: scale theta onto the dual feasible set
// (v = mu * theta), build a region known to contain the dual optimum, and
// eliminate atom i when max over the region of |a_i^T theta| stays below 1
// (Lasso) or |D_g^T theta| stays below w_g (Group-Lasso). The region centre
// never depends on theta, so its correlations with the dictionary are
// computed once; only the radius moves from one iteration to the next.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "screenlab/dictionary.hpp"
#include "screenlab/problem.hpp"

namespace screenlab {

enum class TestKind { Safe, Dst3, Dome, GroupSafe, GroupSt3 };

const char* to_string(TestKind kind);
std::optional<TestKind> parse_test_kind(std::string_view name);
bool is_group_test(TestKind kind);
bool test_matches_problem(TestKind kind, ProblemKind problem);

/// Every test requires its strict inequality to hold by this margin, so that
/// an active atom sitting exactly on the region boundary is never eliminated
/// by roundoff.
inline constexpr double kScreenMargin = 1e-9;

/// One byte per entry; nonzero means "screened".
using Mask = std::vector<std::uint8_t>;

struct DualScaling {
    double mu = 0.0;
    Vector v;  // mu * theta
};

/// mu = clip(theta^T y / (lambda |theta|^2), +-1/corr_inf). corr_inf = 0 means
/// no constraint is active and mu is left unclipped. theta = 0 gives mu = 0.
DualScaling dual_scale_lasso(const Problem& p, std::span<const double> theta, double corr_inf);

/// Same with the bound s_min = min_g w_g / |D_g^T theta| over the groups whose
/// entry in `group_corr_norms` (one per group of the partition) is positive.
DualScaling dual_scale_group(const Problem& p, std::span<const double> theta,
                             std::span<const double> group_corr_norms);

struct SphereRegion {
    Vector center;
    double radius = 0.0;
    Vector center_correlations;  // D^T center over the full dictionary
    /// Radius squared before clamping at zero (equals radius^2 for SAFE).
    double radius_sq_raw = 0.0;
};

/// Regions built from theta with dual scaling on the full dictionary.
SphereRegion region_safe(const Problem& p, std::span<const double> theta);
SphereRegion region_dst3(const Problem& p, std::span<const double> theta, const ExtremeDual& ed);
SphereRegion region_gsafe(const Problem& p, std::span<const double> theta);
SphereRegion region_gst3(const Problem& p, std::span<const double> theta, const ExtremeDual& ed);

/// Dome = SAFE sphere intersected with the half-space a_*^T theta <= 1.
struct DomeParams {
    double lambda = 0.0;
    double lambda_star = 0.0;
    Vector star_correlations;  // a_*^T a_i
    Vector y_correlations;     // y^T a_i
    double radius = 0.0;       // bounding-sphere radius, as for DST3
    double sphere_radius = 0.0;  // SAFE radius |y/lambda - v|
};

DomeParams dome_params(const Problem& p, std::span<const double> theta, const ExtremeDual& ed);

/// mask[k] = 1 - |center_correlations[kept[k]]| - radius > kScreenMargin
Mask test_sphere_lasso(const SphereRegion& region, const IndexSet& kept);

/// mask[k] = Q_lower(t) < y^T a_i < Q_upper(t) with t = a_*^T a_i, i = kept[k],
/// each inequality holding by lambda * kScreenMargin.
Mask test_dome(const DomeParams& dome, const IndexSet& kept);

/// Group-level mask over `kept_groups`:
/// (w_g - |D_g^T c|) / |D_g| - radius > kScreenMargin.
Mask test_sphere_group(const SphereRegion& region, const GroupPartition& partition,
                       const IndexSet& kept_groups);

/// Expand a group mask over `kept_groups` to a mask over the kept indices.
Mask expand_group_mask(const Mask& group_mask, const IndexSet& kept_groups,
                       const GroupPartition& partition, const IndexSet& kept);

/// Eliminated indices accumulate; kept is always their complement.
struct ScreenState {
    IndexSet eliminated;
    IndexSet kept;
    TestKind test = TestKind::Safe;

    static ScreenState initial(std::size_t k, TestKind test);
};

/// Move every kept index whose mask entry is set into the eliminated set.
ScreenState screen_update(const ScreenState& state, std::span<const std::uint8_t> mask);

/// Per-solve screening engine. The constructor does all the dictionary-sized
/// work (D^T y, centre correlations, group norms of the centre); evaluate()
/// costs O(N + |kept|).
class Screener {
  public:
    struct Step {
        double mu = 0.0;
        double radius = 0.0;        // radius of the sphere used by the test
        double radius_sq_raw = 0.0;  // before clamping
        Mask mask;                   // aligned with `kept`
    };

    /// Requires lambda <= lambda_star and a test matching the problem kind.
    Screener(const Problem& p, TestKind kind);

    /// `correlations[k]` must be a_{kept[k]}^T theta, the correlations of the
    /// reduced dictionary that the solver update already computed.
    Step evaluate(std::span<const double> theta, std::span<const double> correlations,
                  const IndexSet& kept) const;

    /// Static screening point: theta = y with correlations D^T y.
    Step evaluate_static() const;

    TestKind kind() const noexcept { return kind_; }
    const ExtremeDual& extreme() const noexcept { return ed_; }
    const Vector& y_correlations() const noexcept { return y_corr_; }

  private:
    Problem problem_;
    TestKind kind_;
    ExtremeDual ed_;
    Vector y_corr_;        // D^T y
    Vector center_corr_;   // D^T c (sphere tests)
    Vector star_corr_;     // D^T a_* (DST3, Dome)
    Vector group_center_norm_;  // |D_g^T c| per group
    double center_offset_sq_ = 0.0;  // |y/lambda - c|^2
};

}  // namespace screenlab
