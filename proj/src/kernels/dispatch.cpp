#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"
#include "lgp/error.hpp"

namespace lgp::kernels {

#if !defined(LGP_HAVE_AVX2)
namespace avx2 {
const Table* table() { return nullptr; }
}  // namespace avx2
#endif

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(LGP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
  }
  return false;
}

const Table& table(Isa isa) {
  if (!isa_supported(isa)) {
    throw Error(ErrorCode::invalid_input, std::string("kernel ISA not available: ") + to_string(isa));
  }
  return isa == Isa::avx2 ? *avx2::table() : scalar::table();
}

namespace {

Isa select_isa() {
  if (const char* env = std::getenv("LGP_SIMD")) {
    if (std::string_view(env) == "scalar") return Isa::scalar;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

const Table& active() {
  static const Table& t = table(active_isa());
  return t;
}

}  // namespace lgp::kernels
