#include <atomic>
#include <cstdlib>
#include <string_view>

#include "eecr/kernels.hpp"

namespace eecr::kernels {

#ifndef EECR_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool avx2_supported() {
#if defined(EECR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

namespace {

const KernelTable* detect() {
  if (const char* env = std::getenv("EECR_KERNELS"); env && std::string_view(env) == "scalar") {
    return &scalar_table();
  }
  if (avx2_supported()) return avx2_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(Backend backend) {
  if (backend == Backend::kScalar) {
    current().store(&scalar_table(), std::memory_order_release);
    return true;
  }
  if (!avx2_supported()) return false;
  current().store(avx2_table(), std::memory_order_release);
  return true;
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

}  // namespace eecr::kernels
