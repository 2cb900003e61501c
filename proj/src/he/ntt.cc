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

#include "he/ntt.h"

#include <bit>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace hybridfl::he_internal {

uint64_t PowMod(uint64_t base, uint64_t exp, uint64_t q) {
  uint64_t result = 1 % q;
  base %= q;
  while (exp > 0) {
    if (exp & 1) result = MulMod(result, base, q);
    base = MulMod(base, base, q);
    exp >>= 1;
  }
  return result;
}

bool IsPrime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL,
                     29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL,
                     29ULL, 31ULL, 37ULL}) {
    uint64_t x = PowMod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = MulMod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

absl::StatusOr<uint64_t> FindNttPrime(int bits, size_t ring_degree) {
  if (bits < 8 || bits > 61) {
    return absl::InvalidArgumentError(
        absl::StrCat("modulus bits must be in [8, 61], got ", bits));
  }
  const uint64_t step = 2 * static_cast<uint64_t>(ring_degree);
  const uint64_t top = uint64_t{1} << bits;
  // Largest candidate below 2^bits congruent to 1 mod step.
  uint64_t candidate = (top - 1) / step * step + 1;
  if (candidate >= top) candidate -= step;
  for (; candidate > step; candidate -= step) {
    if (IsPrime(candidate)) return candidate;
  }
  return absl::NotFoundError(absl::StrCat("no NTT-friendly prime below 2^",
                                          bits, " for ring degree ",
                                          ring_degree));
}

namespace {

size_t BitReverse(size_t x, int bits) {
  size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

}  // namespace

absl::StatusOr<NttTables> NttTables::Create(size_t n, uint64_t q) {
  if (n < 2 || !std::has_single_bit(n)) {
    return absl::InvalidArgumentError(
        absl::StrCat("NTT length must be a power of two, got ", n));
  }
  if ((q - 1) % (2 * n) != 0) {
    return absl::InvalidArgumentError("modulus is not 1 mod 2n");
  }
  // psi is a primitive 2n-th root of unity iff psi^n == -1.
  uint64_t psi = 0;
  for (uint64_t g = 2; g < q; ++g) {
    uint64_t candidate = PowMod(g, (q - 1) / (2 * n), q);
    if (PowMod(candidate, n, q) == q - 1) {
      psi = candidate;
      break;
    }
  }
  if (psi == 0) return absl::InternalError("no primitive 2n-th root found");

  NttTables t;
  t.n_ = n;
  t.q_ = q;
  t.n_inv_ = PowMod(n, q - 2, q);
  const uint64_t psi_inv = PowMod(psi, q - 2, q);
  const int log_n = std::countr_zero(n);
  t.psi_rev_.resize(n);
  t.psi_inv_rev_.resize(n);
  uint64_t pw = 1;
  uint64_t pw_inv = 1;
  for (size_t i = 0; i < n; ++i) {
    size_t r = BitReverse(i, log_n);
    t.psi_rev_[r] = pw;
    t.psi_inv_rev_[r] = pw_inv;
    pw = MulMod(pw, psi, q);
    pw_inv = MulMod(pw_inv, psi_inv, q);
  }
  return t;
}

void NttTables::Forward(absl::Span<uint64_t> a) const {
  size_t t = n_;
  for (size_t m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (size_t i = 0; i < m; ++i) {
      const size_t j1 = 2 * i * t;
      const uint64_t s = psi_rev_[m + i];
      for (size_t j = j1; j < j1 + t; ++j) {
        const uint64_t u = a[j];
        const uint64_t v = MulMod(a[j + t], s, q_);
        a[j] = AddMod(u, v, q_);
        a[j + t] = SubMod(u, v, q_);
      }
    }
  }
}

void NttTables::Inverse(absl::Span<uint64_t> a) const {
  size_t t = 1;
  for (size_t m = n_; m > 1; m >>= 1) {
    const size_t h = m >> 1;
    size_t j1 = 0;
    for (size_t i = 0; i < h; ++i) {
      const uint64_t s = psi_inv_rev_[h + i];
      for (size_t j = j1; j < j1 + t; ++j) {
        const uint64_t u = a[j];
        const uint64_t v = a[j + t];
        a[j] = AddMod(u, v, q_);
        a[j + t] = MulMod(SubMod(u, v, q_), s, q_);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (uint64_t& x : a) x = MulMod(x, n_inv_, q_);
}

std::vector<uint64_t> NegacyclicMultiplyNaive(absl::Span<const uint64_t> a,
                                              absl::Span<const uint64_t> b,
                                              uint64_t q) {
  const size_t n = a.size();
  std::vector<uint64_t> out(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      const uint64_t p = MulMod(a[i], b[j], q);
      const size_t k = i + j;
      if (k < n) {
        out[k] = AddMod(out[k], p, q);
      } else {
        out[k - n] = SubMod(out[k - n], p, q);
      }
    }
  }
  return out;
}

}  // namespace hybridfl::he_internal
