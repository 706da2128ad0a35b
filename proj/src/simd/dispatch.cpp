#include "retasa/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace retasa::simd {

#if defined(RETASA_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

namespace {

const KernelTable*
resolve()
{
  if (const char* env = std::getenv("RETASA_SIMD");
      env != nullptr && std::string_view(env) == "scalar")
    return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels())
    return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>&
active_slot()
{
  static std::atomic<const KernelTable*> slot{ resolve() };
  return slot;
}

} // namespace

const KernelTable*
avx2_kernels()
{
#if defined(RETASA_HAVE_AVX2)
  static const bool supported =
    __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable&
active_kernels()
{
  return *active_slot().load(std::memory_order_acquire);
}

void
set_active_kernels(const KernelTable& table)
{
  active_slot().store(&table, std::memory_order_release);
}

} // namespace retasa::simd
