#include <atomic>
#include <cstdlib>
#include <string_view>

#include "shafttrack/error.hpp"
#include "shafttrack/kernels.hpp"

namespace shafttrack::kernels {

#if defined(SHAFTTRACK_BUILD_AVX2)
const KernelTable& avx2_kernels();
#endif

namespace {

// -1 = not yet resolved, otherwise static_cast<int>(Isa).
std::atomic<int> g_isa{-1};

bool cpu_has_avx2() {
#if defined(SHAFTTRACK_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa resolve_default() {
  if (const char* env = std::getenv("SHAFTTRACK_SIMD")) {
    const std::string_view v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

}  // namespace

const char* to_string(Isa isa) {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

const KernelTable* avx2_table() {
#if defined(SHAFTTRACK_BUILD_AVX2)
  return cpu_has_avx2() ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

bool isa_available(Isa isa) {
  return isa == Isa::Scalar || avx2_table() != nullptr;
}

Isa active_isa() {
  int v = g_isa.load(std::memory_order_acquire);
  if (v < 0) {
    v = static_cast<int>(resolve_default());
    int expected = -1;
    if (!g_isa.compare_exchange_strong(expected, v)) v = expected;
  }
  return static_cast<Isa>(v);
}

void force_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw Error(ErrorCode::InvalidArgument, std::string("SIMD variant unavailable: ") + to_string(isa));
  }
  g_isa.store(static_cast<int>(isa), std::memory_order_release);
}

const KernelTable& active() {
  return active_isa() == Isa::Avx2 ? *avx2_table() : scalar_table();
}

}  // namespace shafttrack::kernels
