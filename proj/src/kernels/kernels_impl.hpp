#pragma once

#include "ssvep/kernels.hpp"

namespace ssvep::kernels::detail {

extern const KernelTable kScalarTable;

#if defined(SSVEP_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

#if defined(SSVEP_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif

}  // namespace ssvep::kernels::detail
