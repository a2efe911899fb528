#pragma once

#include "rts_sph/simd.hpp"

namespace rts::simd::detail {

const Ops& scalar_ops();
#if defined(RTS_SPH_HAVE_AVX2)
const Ops& avx2_ops();
#endif

}  // namespace rts::simd::detail
