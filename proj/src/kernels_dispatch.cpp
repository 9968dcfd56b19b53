#include <cstdlib>
#include <cstring>

#include "dilab/kernels.hpp"

namespace dilab::kernels {

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") != 0; }

namespace {
const Table* select() {
  const char* env = std::getenv("DI_LAB_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return &kScalar;
    if (std::strcmp(env, "avx2") == 0)
      return cpu_has_avx2() ? &kAvx2 : &kScalar;
  }
  return cpu_has_avx2() ? &kAvx2 : &kScalar;
}
}  // namespace

const Table& active() {
  static const Table* t = select();
  return *t;
}

}  // namespace dilab::kernels
