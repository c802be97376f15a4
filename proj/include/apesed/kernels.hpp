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

#ifndef APESED_KERNELS_HPP_
#define APESED_KERNELS_HPP_

// Dense linear-algebra kernels behind the autodiff engine.
//
// Each kernel exists twice: a plain triple loop in `serial` that is kept as
// the reference for tests, and a row-partitioned version in `omp`. The omp
// kernels compute every output row with the same instruction sequence no
// matter how many threads run, so results are bit-identical across thread
// counts. The unqualified entry points dispatch to `omp`.
//
// All matrices are row-major; the kernels accumulate (C += ...).

#include <cstddef>
#include <span>

namespace apesed::kernels {

namespace serial {

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
// C[k x n] += A[m x k]^T * B[m x n]
void gemm_tn(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
// C[m x n] += A[m x k] * B[n x k]^T
void gemm_nt(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);

}  // namespace serial

namespace omp {

void gemm_nn(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void gemm_tn(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void gemm_nt(size_t m, size_t n, size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c);

}  // namespace omp

using omp::gemm_nn;
using omp::gemm_nt;
using omp::gemm_tn;

// Below this many multiply-adds the omp kernels stay on the calling thread.
inline constexpr size_t kParallelThreshold = size_t{1} << 17;

// Applies the APESED_THREADS cap (if set) to the OpenMP runtime.
void configure_threads_from_env();

}  // namespace apesed::kernels

#endif  // APESED_KERNELS_HPP_
