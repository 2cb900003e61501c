/*
 * Copyright 2026 The hybridfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Number-theoretic helpers for the ckks-lite backend: 64-bit modular
// arithmetic, prime search, and the negacyclic NTT over Z_q[X]/(X^N + 1).

#ifndef HYBRIDFL_HE_NTT_H_
#define HYBRIDFL_HE_NTT_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"

namespace hybridfl::he_internal {

inline uint64_t MulMod(uint64_t a, uint64_t b, uint64_t q) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % q);
}
inline uint64_t AddMod(uint64_t a, uint64_t b, uint64_t q) {
  uint64_t s = a + b;
  return s >= q ? s - q : s;
}
inline uint64_t SubMod(uint64_t a, uint64_t b, uint64_t q) {
  return a >= b ? a - b : a + q - b;
}
uint64_t PowMod(uint64_t base, uint64_t exp, uint64_t q);

// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool IsPrime(uint64_t n);

// Largest prime q < 2^bits with q = 1 (mod 2 * ring_degree).
absl::StatusOr<uint64_t> FindNttPrime(int bits, size_t ring_degree);

// Precomputed twiddles for the negacyclic transform of length n modulo q.
class NttTables {
 public:
  static absl::StatusOr<NttTables> Create(size_t n, uint64_t q);

  size_t n() const { return n_; }
  uint64_t modulus() const { return q_; }

  // In place. Forward output is in bit-reversed order; Inverse accepts that
  // order and returns natural-order coefficients.
  void Forward(absl::Span<uint64_t> a) const;
  void Inverse(absl::Span<uint64_t> a) const;

 private:
  NttTables() = default;

  size_t n_ = 0;
  uint64_t q_ = 0;
  uint64_t n_inv_ = 0;
  std::vector<uint64_t> psi_rev_;
  std::vector<uint64_t> psi_inv_rev_;
};

// Schoolbook product in Z_q[X]/(X^n + 1). Test oracle for the NTT path.
std::vector<uint64_t> NegacyclicMultiplyNaive(absl::Span<const uint64_t> a,
                                              absl::Span<const uint64_t> b,
                                              uint64_t q);

}  // namespace hybridfl::he_internal

#endif  // HYBRIDFL_HE_NTT_H_
