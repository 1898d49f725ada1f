#include "screenlab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"

namespace screenlab::kernels {

namespace {

constexpr KernelTable kScalar{
    "scalar",       scalar::dot,       scalar::sqnorm,        scalar::axpy,
    scalar::gemv_t, scalar::gemv_cols, scalar::soft_threshold,
};

#ifdef SCREENLAB_HAVE_AVX2
constexpr KernelTable kAvx2{
    "avx2",       avx2::dot,       avx2::sqnorm,        avx2::axpy,
    avx2::gemv_t, avx2::gemv_cols, avx2::soft_threshold,
};
#endif

#ifdef SCREENLAB_HAVE_AVX2
bool cpu_has_avx2() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelTable* best_available() {
    if (const KernelTable* t = avx2_table()) return t;
    return &kScalar;
}

const KernelTable* initial_table() {
    if (const char* env = std::getenv("SCREENLAB_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return &kScalar;
        if (want == "avx2" && avx2_table()) return avx2_table();
    }
    return best_available();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#ifdef SCREENLAB_HAVE_AVX2
    static const bool ok = cpu_has_avx2();
    return ok ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
    const KernelTable* t = nullptr;
    if (name == "scalar")
        t = &kScalar;
    else if (name == "avx2")
        t = avx2_table();
    else if (name == "auto")
        t = best_available();
    if (!t) return false;
    current().store(t, std::memory_order_relaxed);
    return true;
}

}  // namespace screenlab::kernels
