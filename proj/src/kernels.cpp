/*
 * Copyright 2026 The apesed Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "apesed/kernels.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace apesed::kernels {

namespace serial {

void gemm_nn(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (size_t p = 0; p < k; ++p) sum += a[i * k + p] * b[p * n + j];
      c[i * n + j] += sum;
    }
}

void gemm_tn(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (size_t t = 0; t < m; ++t) sum += a[t * k + i] * b[t * n + j];
      c[i * n + j] += sum;
    }
}

void gemm_nt(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (size_t p = 0; p < k; ++p) sum += a[i * k + p] * b[j * k + p];
      c[i * n + j] += sum;
    }
}

}  // namespace serial

namespace omp {

namespace {

// One output row of A * B: axpy over the rows of B keeps the inner loop
// contiguous and vectorizable.
inline void row_nn(size_t n, size_t k, const double* __restrict__ a_row,
                   const double* __restrict__ b, double* __restrict__ c_row) {
  for (size_t p = 0; p < k; ++p) {
    const double s = a_row[p];
    if (s == 0.0) continue;
    const double* b_row = b + p * n;
    for (size_t j = 0; j < n; ++j) c_row[j] += s * b_row[j];
  }
}

}  // namespace

void gemm_nn(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
  const bool parallel = m > 1 && m * n * k >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (parallel)
  for (size_t i = 0; i < m; ++i) row_nn(n, k, ap + i * k, bp, cp + i * n);
}

void gemm_tn(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
  const bool parallel = k > 1 && m * n * k >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (parallel)
  for (size_t i = 0; i < k; ++i) {
    double* __restrict__ c_row = cp + i * n;
    for (size_t t = 0; t < m; ++t) {
      const double s = ap[t * k + i];
      if (s == 0.0) continue;
      const double* __restrict__ b_row = bp + t * n;
      for (size_t j = 0; j < n; ++j) c_row[j] += s * b_row[j];
    }
  }
}

void gemm_nt(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
  const bool parallel = m > 1 && m * n * k >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (parallel)
  for (size_t i = 0; i < m; ++i) {
    const double* __restrict__ a_row = ap + i * k;
    for (size_t j = 0; j < n; ++j) {
      const double* __restrict__ b_row = bp + j * k;
      double sum = 0.0;
#pragma omp simd reduction(+ : sum)
      for (size_t p = 0; p < k; ++p) sum += a_row[p] * b_row[p];
      cp[i * n + j] += sum;
    }
  }
}

}  // namespace omp

void configure_threads_from_env() {
  if (const char* env = std::getenv("APESED_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
}

}  // namespace apesed::kernels
