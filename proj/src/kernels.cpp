#include "mls/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace mls {

namespace {

const KernelOps& select() {
  const char* env = std::getenv("MLS_KERNELS");
  if (env != nullptr && *env != '\0') {
    const std::string want(env);
    if (want == "scalar") return kernels_scalar();
#ifdef MLS_HAVE_AVX2
    if (want == "avx2") {
      if (!cpu_has_avx2())
        throw std::runtime_error("MLS_KERNELS=avx2 requested but CPU lacks AVX2/FMA");
      return kernels_avx2();
    }
#endif
    throw std::runtime_error("unknown MLS_KERNELS value: " + want);
  }
#ifdef MLS_HAVE_AVX2
  if (cpu_has_avx2()) return kernels_avx2();
#endif
  return kernels_scalar();
}

}  // namespace

const KernelOps& kernels() {
  static const KernelOps& ops = select();
  return ops;
}

}  // namespace mls
