#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace rfsl::kernels {

namespace {

const KernelTable kScalar{
    "scalar",
    detail::dot_scalar,
    detail::weighted_sq_dist_scalar,
    detail::axpy_scalar,
    detail::axpby_scalar,
    detail::affine_scalar,
    detail::euler_affine_scalar,
};

const KernelTable kAvx2{
    "avx2",
    detail::dot_avx2,
    detail::weighted_sq_dist_avx2,
    detail::axpy_avx2,
    detail::axpby_avx2,
    detail::affine_avx2,
    detail::euler_affine_avx2,
};

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* env = std::getenv("RFSL_KERNELS"); env && std::string_view(env) == "scalar")
    return kScalar;
  if (const KernelTable* t = avx2()) return *t;
  return kScalar;
}

}  // namespace

const KernelTable& scalar() { return kScalar; }

const KernelTable* avx2() {
  static const bool available = detail::avx2_compiled() && cpu_has_avx2();
  return available ? &kAvx2 : nullptr;
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace rfsl::kernels
