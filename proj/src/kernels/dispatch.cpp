#include <cstdlib>
#include <cstring>
#include <string>

#include "hfrec/errors.hpp"
#include "hfrec/kernels.hpp"

namespace hfrec::kern {
namespace {

const Ops* select() {
  if (const char* env = std::getenv("HFREC_KERNELS")) {
    const std::string want = env;
    if (want == "scalar") return &scalar_ops();
    if (want == "avx2") {
      if (!avx2_supported())
        throw ConfigError("HFREC_KERNELS=avx2 requested but the CPU lacks AVX2/FMA");
      return &avx2_ops();
    }
    if (!want.empty())
      throw ConfigError("unknown HFREC_KERNELS value '" + want + "' (scalar|avx2)");
  }
  return avx2_supported() ? &avx2_ops() : &scalar_ops();
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops& ops() {
  static const Ops* active = select();
  return *active;
}

std::vector<const Ops*> available() {
  std::vector<const Ops*> v{&scalar_ops()};
  if (avx2_supported()) v.push_back(&avx2_ops());
  return v;
}

}  // namespace hfrec::kern
