// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/common.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace carray {

int set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
  return omp_get_max_threads();
#else
  (void)n;
  return 1;
#endif
}

}  // namespace carray
