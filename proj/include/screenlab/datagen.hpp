#pragma once

// Seeded synthetic dictionaries and observations.
//
// All randomness comes from xoshiro256** seeded through splitmix64, with
// normal deviates from the Box-Muller transform, so a (spec, seed) pair gives
// the same bytes on every platform with IEEE doubles.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "screenlab/dictionary.hpp"

namespace screenlab {

class Rng {
  public:
    explicit Rng(std::uint64_t seed);
    /// Independent stream `id` derived from `seed`.
    static Rng stream(std::uint64_t seed, std::uint64_t id);

    std::uint64_t next();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

  private:
    std::array<std::uint64_t, 4> s_{};
    std::optional<double> spare_;
};

enum class DictKind { Gaussian, Pnoise, Dct };
enum class ObsKind { UnitSphere, AtomLike, BernoulliGaussian };

const char* to_string(DictKind k);
const char* to_string(ObsKind k);
std::optional<DictKind> parse_dict_kind(std::string_view name);
std::optional<ObsKind> parse_obs_kind(std::string_view name);

struct GenSpec {
    DictKind dict = DictKind::Gaussian;
    ObsKind obs = ObsKind::UnitSphere;
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    double bernoulli_p = 0.05;
    double snr_db = 20.0;
    double pnoise_scale = 0.1;
    std::size_t group_size = 0;  // 0: no partition

    /// Throws std::invalid_argument on bad dimensions or probabilities.
    void validate() const;
};

/// Unit-norm N x K dictionary of the requested kind.
Dictionary gen_dictionary(const GenSpec& spec);

/// a_k[n] proportional to cos(pi (n + 1/2) k / K); requires K >= N.
Dictionary gen_dct_dictionary(std::size_t n, std::size_t k);

/// Random permutation of [0, K) cut into consecutive groups of `group_size`
/// (the last may be shorter), weights sqrt(|g|).
GroupPartition gen_partition(const Dictionary& d, std::size_t group_size, std::uint64_t seed);

struct Observation {
    Vector y;  // unit norm
    /// Bernoulli-Gaussian only: planted coefficients, D x, and the noise
    /// added to it before normalization.
    std::optional<Vector> ground_truth;
    std::optional<Vector> signal;
    std::optional<Vector> noise;
};

inline constexpr int kMaxBernoulliRetries = 100;

/// Throws std::invalid_argument if the Bernoulli-Gaussian kind lacks a
/// partition, and std::runtime_error if no group is drawn active in
/// kMaxBernoulliRetries attempts.
Observation gen_observation(const GenSpec& spec, const Dictionary& d,
                            const GroupPartition* partition = nullptr);

}  // namespace screenlab
