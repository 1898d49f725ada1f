#include "screenlab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace screenlab {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr std::uint64_t kStreamDictionary = 1;
constexpr std::uint64_t kStreamObservation = 2;
constexpr std::uint64_t kStreamPartition = 3;

void normalize(std::span<double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    const double inv = 1.0 / std::sqrt(s);
    for (double& x : v) x *= inv;
}

void gaussian_atom(Rng& rng, std::span<double> out) {
    for (double& v : out) v = rng.normal();
    normalize(out);
}

void pnoise_atom(Rng& rng, double scale, std::span<double> out) {
    const double kappa = rng.uniform();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (i == 0 ? 1.0 : 0.0) + scale * kappa * rng.normal();
    normalize(out);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t st = seed;
    for (auto& w : s_) w = splitmix64(st);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t id) {
    std::uint64_t st = seed ^ (id * 0xD1B54A32D192ED03ULL);
    return Rng(splitmix64(st));
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    return r * std::cos(a);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
}

const char* to_string(DictKind k) {
    switch (k) {
        case DictKind::Gaussian: return "gaussian";
        case DictKind::Pnoise: return "pnoise";
        case DictKind::Dct: return "dct";
    }
    return "?";
}

const char* to_string(ObsKind k) {
    switch (k) {
        case ObsKind::UnitSphere: return "unit-sphere";
        case ObsKind::AtomLike: return "atom-like";
        case ObsKind::BernoulliGaussian: return "bernoulli-gaussian";
    }
    return "?";
}

std::optional<DictKind> parse_dict_kind(std::string_view name) {
    if (name == "gaussian") return DictKind::Gaussian;
    if (name == "pnoise") return DictKind::Pnoise;
    if (name == "dct") return DictKind::Dct;
    return std::nullopt;
}

std::optional<ObsKind> parse_obs_kind(std::string_view name) {
    if (name == "unit-sphere") return ObsKind::UnitSphere;
    if (name == "atom-like") return ObsKind::AtomLike;
    if (name == "bernoulli-gaussian") return ObsKind::BernoulliGaussian;
    return std::nullopt;
}

void GenSpec::validate() const {
    if (n < 1 || k < 1) throw std::invalid_argument("GenSpec: N and K must be >= 1");
    if (!(bernoulli_p > 0.0 && bernoulli_p < 1.0))
        throw std::invalid_argument("GenSpec: bernoulli_p must lie in (0, 1)");
    if (!std::isfinite(snr_db)) throw std::invalid_argument("GenSpec: snr_db must be finite");
    if (!(pnoise_scale >= 0.0)) throw std::invalid_argument("GenSpec: pnoise_scale must be >= 0");
    if (dict == DictKind::Dct && k < n)
        throw std::invalid_argument("GenSpec: the DCT dictionary needs K >= N");
    if (group_size > k) throw std::invalid_argument("GenSpec: group_size exceeds K");
}

Dictionary gen_dct_dictionary(std::size_t n, std::size_t k) {
    if (n < 1 || k < 1) throw std::invalid_argument("gen_dct_dictionary: N and K must be >= 1");
    if (k < n) throw std::invalid_argument("gen_dct_dictionary: K must be >= N");
    std::vector<double> data(n * k);
    for (std::size_t j = 0; j < k; ++j) {
        std::span<double> col(data.data() + j * n, n);
        for (std::size_t i = 0; i < n; ++i)
            col[i] = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) *
                              static_cast<double>(j) / static_cast<double>(k));
        normalize(col);
    }
    return Dictionary(n, k, std::move(data));
}

Dictionary gen_dictionary(const GenSpec& spec) {
    spec.validate();
    if (spec.dict == DictKind::Dct) return gen_dct_dictionary(spec.n, spec.k);
    Rng rng = Rng::stream(spec.seed, kStreamDictionary);
    std::vector<double> data(spec.n * spec.k);
    for (std::size_t j = 0; j < spec.k; ++j) {
        std::span<double> col(data.data() + j * spec.n, spec.n);
        if (spec.dict == DictKind::Gaussian) gaussian_atom(rng, col);
        else
            pnoise_atom(rng, spec.pnoise_scale, col);
    }
    return Dictionary(spec.n, spec.k, std::move(data));
}

GroupPartition gen_partition(const Dictionary& d, std::size_t group_size, std::uint64_t seed) {
    if (group_size < 1 || group_size > d.cols())
        throw std::invalid_argument("gen_partition: group size must lie in [1, K]");
    Rng rng = Rng::stream(seed, kStreamPartition);
    std::vector<std::size_t> perm(d.cols());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<IndexSet> groups;
    for (std::size_t start = 0; start < perm.size(); start += group_size) {
        const std::size_t stop = std::min(perm.size(), start + group_size);
        std::vector<std::size_t> g(perm.begin() + static_cast<std::ptrdiff_t>(start),
                                   perm.begin() + static_cast<std::ptrdiff_t>(stop));
        std::sort(g.begin(), g.end());
        groups.emplace_back(std::move(g));
    }
    return GroupPartition(d, std::move(groups));
}

Observation gen_observation(const GenSpec& spec, const Dictionary& d,
                            const GroupPartition* partition) {
    spec.validate();
    if (d.rows() != spec.n) throw DimensionError("gen_observation: dictionary has wrong N");
    Rng rng = Rng::stream(spec.seed, kStreamObservation);
    Observation obs;
    obs.y.resize(spec.n);
    switch (spec.obs) {
        case ObsKind::UnitSphere:
            gaussian_atom(rng, obs.y);
            return obs;
        case ObsKind::AtomLike:
            if (spec.dict == DictKind::Pnoise) pnoise_atom(rng, spec.pnoise_scale, obs.y);
            else if (spec.dict == DictKind::Gaussian) gaussian_atom(rng, obs.y);
            else
                throw std::invalid_argument("gen_observation: no atom distribution for DCT");
            return obs;
        case ObsKind::BernoulliGaussian: break;
    }

    if (!partition) throw std::invalid_argument("gen_observation: Bernoulli-Gaussian needs groups");
    if (partition->universe() != d.cols())
        throw DimensionError("gen_observation: partition does not match the dictionary");
    Vector x(d.cols(), 0.0);
    bool any = false;
    for (int attempt = 0; attempt < kMaxBernoulliRetries && !any; ++attempt) {
        for (std::size_t g = 0; g < partition->size(); ++g) {
            if (rng.uniform() >= spec.bernoulli_p) continue;
            any = true;
            for (std::size_t i : partition->group(g)) x[i] = rng.normal();
        }
    }
    if (!any) throw std::runtime_error("gen_observation: no active group drawn");

    Vector signal = d.apply(x);
    Vector noise(spec.n);
    for (double& v : noise) v = rng.normal();
    double ss = 0.0;
    double nn = 0.0;
    for (std::size_t i = 0; i < spec.n; ++i) {
        ss += signal[i] * signal[i];
        nn += noise[i] * noise[i];
    }
    const double scale = std::sqrt(ss / (nn * std::pow(10.0, spec.snr_db / 10.0)));
    for (double& v : noise) v *= scale;
    for (std::size_t i = 0; i < spec.n; ++i) obs.y[i] = signal[i] + noise[i];
    normalize(obs.y);
    obs.ground_truth = std::move(x);
    obs.signal = std::move(signal);
    obs.noise = std::move(noise);
    return obs;
}

}  // namespace screenlab
