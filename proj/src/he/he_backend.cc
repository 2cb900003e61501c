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

#include <bit>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "he/backends.h"
#include "hybridfl/he_backend.h"
#include "hybridfl/status_macros.h"

namespace hybridfl {

absl::string_view HeBackendName(HeBackendKind kind) {
  switch (kind) {
    case HeBackendKind::kCkksLite:
      return "ckks_lite";
    case HeBackendKind::kMock:
      return "mock";
  }
  return "unknown";
}

absl::StatusOr<HeBackendKind> ParseHeBackendKind(absl::string_view name) {
  if (name == "ckks_lite" || name == "ckks-lite") return HeBackendKind::kCkksLite;
  if (name == "mock") return HeBackendKind::kMock;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown HE backend '", name, "'"));
}

double HeParams::MaxEncodableMagnitude() const {
  // One bit for the sign and one for noise and rounding headroom.
  return std::ldexp(1.0, modulus_bits - 2 - scale_bits) /
         static_cast<double>(max_additions + 1);
}

absl::Status HeParams::Validate() const {
  if (ring_degree < 8 || ring_degree > (1 << 17) ||
      !std::has_single_bit(static_cast<unsigned>(ring_degree))) {
    return absl::InvalidArgumentError(absl::StrCat(
        "ring degree must be a power of two in [8, 2^17], got ", ring_degree));
  }
  if (modulus_bits < 8 || modulus_bits > 61) {
    return absl::InvalidArgumentError(absl::StrCat(
        "modulus bits must be in [8, 61], got ", modulus_bits));
  }
  if (scale_bits < 1 || scale_bits >= modulus_bits) {
    return absl::InvalidArgumentError(
        absl::StrCat("scale bits must be in [1, modulus bits), got ",
                     scale_bits));
  }
  if (max_additions < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("max additions must be >= 1, got ", max_additions));
  }
  if (MaxEncodableMagnitude() < 1.0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "modulus headroom of ", modulus_bits - scale_bits,
        " bits cannot hold ", max_additions, " additions of unit values"));
  }
  return absl::OkStatus();
}

double SimulatedCost(const HeCostModel& cost, int64_t n_vectors,
                     int64_t vec_len) {
  return static_cast<double>(n_vectors) *
         (cost.per_op_seconds +
          cost.per_slot_seconds * static_cast<double>(vec_len));
}

HeRoundCost SimulatedRoundCost(const HeCostModel& cost, int64_t n_vectors,
                               int64_t vec_len) {
  if (vec_len == 0 || n_vectors == 0) return {};
  const double phase = SimulatedCost(cost, n_vectors, vec_len);
  return {.encrypt_s = phase, .aggregate_s = phase, .decrypt_s = phase};
}

absl::StatusOr<std::vector<Ciphertext>> HeBackend::AddVectors(
    absl::Span<const Ciphertext> a, absl::Span<const Ciphertext> b) const {
  if (a.size() != b.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot add encrypted vectors of ", a.size(), " and ",
                     b.size(), " ciphertexts"));
  }
  std::vector<Ciphertext> out;
  out.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    ASSIGN_OR_RETURN(Ciphertext sum, Add(a[i], b[i]));
    out.push_back(std::move(sum));
  }
  return out;
}

absl::StatusOr<std::unique_ptr<HeBackend>> MakeHeBackend(
    HeBackendKind kind, const HeParams& params) {
  RETURN_IF_ERROR(params.Validate());
  switch (kind) {
    case HeBackendKind::kCkksLite:
      return he_internal::MakeCkksLiteBackend(params);
    case HeBackendKind::kMock:
      return he_internal::MakeMockBackend(params);
  }
  return absl::InvalidArgumentError("unknown HE backend kind");
}

namespace he_internal {

absl::Status CheckEncodable(const HeParams& params,
                            absl::Span<const double> x) {
  const double limit = params.MaxEncodableMagnitude();
  for (size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("cannot encrypt non-finite value at index ", i));
    }
    if (std::abs(x[i]) > limit) {
      return absl::OutOfRangeError(absl::StrCat(
          "fixed-point overflow: |", x[i], "| at index ", i,
          " exceeds the encodable magnitude ", limit));
    }
  }
  return absl::OkStatus();
}

absl::Status CheckAddable(HeBackendKind kind, const HeParams& params,
                          const Ciphertext& a, const Ciphertext& b) {
  if (a.backend != kind || b.backend != kind) {
    return absl::InvalidArgumentError(
        "ciphertext belongs to a different HE backend");
  }
  if (!(a.params == params) || !(b.params == params)) {
    return absl::InvalidArgumentError("ciphertext parameter mismatch");
  }
  if (a.slots_used != b.slots_used) {
    return absl::InvalidArgumentError(
        absl::StrCat("slot count mismatch: ", a.slots_used, " vs ",
                     b.slots_used));
  }
  const int64_t count = int64_t{a.add_count} + b.add_count + 1;
  if (count > params.max_additions) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "additive depth exhausted: ", count, " > ", params.max_additions));
  }
  return absl::OkStatus();
}

absl::Status CheckDecryptLayout(HeBackendKind kind, const HeParams& params,
                                absl::Span<const Ciphertext> cts,
                                size_t original_len) {
  const size_t slots = params.slot_count();
  const size_t expected = (original_len + slots - 1) / slots;
  if (cts.size() != expected) {
    return absl::InvalidArgumentError(
        absl::StrCat("decrypt: ", cts.size(), " ciphertexts cannot hold ",
                     original_len, " values (expected ", expected, ")"));
  }
  size_t available = 0;
  for (const Ciphertext& ct : cts) {
    if (ct.backend != kind) {
      return absl::InvalidArgumentError(
          "ciphertext belongs to a different HE backend");
    }
    if (!(ct.params == params)) {
      return absl::InvalidArgumentError("ciphertext parameter mismatch");
    }
    if (ct.slots_used < 0 || static_cast<size_t>(ct.slots_used) > slots) {
      return absl::InvalidArgumentError("ciphertext slot count out of range");
    }
    available += static_cast<size_t>(ct.slots_used);
  }
  if (available < original_len) {
    return absl::InvalidArgumentError(
        absl::StrCat("decrypt: requested ", original_len,
                     " values but ciphertexts carry ", available));
  }
  return absl::OkStatus();
}

}  // namespace he_internal
}  // namespace hybridfl
