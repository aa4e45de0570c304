#pragma once

#include "sdosc/kernels.hpp"

namespace sdosc::kernels::detail {

const KernelTable& scalar_table();
#if defined(SDOSC_BUILD_AVX2)
const KernelTable& avx2_table();
#endif

}  // namespace sdosc::kernels::detail
