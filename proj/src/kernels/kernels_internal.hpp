#pragma once

#include "lgp/kernels.hpp"

namespace lgp::kernels {
namespace scalar {
const Table& table();
}
namespace avx2 {
// Null when the build has no x86 AVX2 translation unit.
const Table* table();
}
}  // namespace lgp::kernels
