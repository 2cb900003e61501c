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

#ifndef HYBRIDFL_HE_BACKEND_H_
#define HYBRIDFL_HE_BACKEND_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"
#include "hybridfl/vec_core.h"

namespace hybridfl {

enum class HeBackendKind : uint8_t {
  kCkksLite = 1,
  kMock = 2,
};

absl::string_view HeBackendName(HeBackendKind kind);
absl::StatusOr<HeBackendKind> ParseHeBackendKind(absl::string_view name);

// Parameters of the addition-only RLWE scheme. Plaintexts are packed one real
// per polynomial coefficient, so slot_count() == ring_degree. These are toy
// parameters: they are sized for correctness headroom, not for security.
struct HeParams {
  int ring_degree = 4096;
  int scale_bits = 20;
  int modulus_bits = 50;
  int max_additions = 256;

  size_t slot_count() const { return static_cast<size_t>(ring_degree); }

  // Largest |x| that still decodes correctly after max_additions additions.
  double MaxEncodableMagnitude() const;

  absl::Status Validate() const;

  friend bool operator==(const HeParams&, const HeParams&) = default;
};

// Simulated time charged for HE work, linear in plaintext length.
struct HeCostModel {
  double per_slot_seconds = 1e-6;
  double per_op_seconds = 1e-3;
};

// n_vectors * (per_op_seconds + per_slot_seconds * vec_len): the cost of one
// phase (encryption, aggregation or decryption) over n_vectors vectors.
double SimulatedCost(const HeCostModel& cost, int64_t n_vectors,
                     int64_t vec_len);

struct HeRoundCost {
  double encrypt_s = 0.0;
  double aggregate_s = 0.0;
  double decrypt_s = 0.0;

  double total() const { return encrypt_s + aggregate_s + decrypt_s; }
};

// One encryption phase, plus the same charge once for server-side
// aggregation and once for decryption. Zero when vec_len == 0 (nothing is
// encrypted).
HeRoundCost SimulatedRoundCost(const HeCostModel& cost, int64_t n_vectors,
                               int64_t vec_len);

struct PublicKey {
  HeBackendKind backend = HeBackendKind::kMock;
  HeParams params;
  uint64_t key_id = 0;
  // ckks-lite: (b, a) = (-a*s + e, a), both in NTT representation.
  std::vector<uint64_t> b;
  std::vector<uint64_t> a;
};

struct SecretKey {
  HeBackendKind backend = HeBackendKind::kMock;
  HeParams params;
  uint64_t key_id = 0;
  // ckks-lite: ternary secret s in NTT representation.
  std::vector<uint64_t> s;
};

struct KeyPair {
  PublicKey public_key;
  SecretKey secret_key;
};

// RLWE pair (c0, c1) in coefficient representation.
struct RlwePayload {
  std::vector<uint64_t> c0;
  std::vector<uint64_t> c1;
  friend bool operator==(const RlwePayload&, const RlwePayload&) = default;
};

// The mock backend keeps the plaintext chunk in the clear.
struct PlainPayload {
  std::vector<double> values;
  friend bool operator==(const PlainPayload&, const PlainPayload&) = default;
};

struct Ciphertext {
  HeBackendKind backend = HeBackendKind::kMock;
  HeParams params;
  int slots_used = 0;
  int add_count = 0;
  std::variant<RlwePayload, PlainPayload> payload;

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

// Additively homomorphic encryption of real vectors. A vector of length L is
// encrypted as ceil(L / slot_count) ciphertexts.
//
// Decrypting with a secret key that does not match the public key yields
// garbage; the ckks-lite backend cannot detect that. Structural mismatches
// (parameters, chunk counts, lengths) are reported as errors.
class HeBackend {
 public:
  virtual ~HeBackend() = default;

  virtual HeBackendKind kind() const = 0;
  virtual const HeParams& params() const = 0;

  // Bound on per-coordinate decode error of a fresh ciphertext. Decrypting
  // the sum of k fresh ciphertexts (add_count = k - 1) errs by at most
  // DecodeTolerance() * (1 + add_count).
  virtual double DecodeTolerance() const = 0;

  virtual absl::StatusOr<KeyPair> KeyGen(uint64_t seed) const = 0;

  virtual absl::StatusOr<std::vector<Ciphertext>> Encrypt(
      const PublicKey& pk, absl::Span<const double> x,
      uint64_t seed) const = 0;

  virtual absl::StatusOr<Ciphertext> Add(const Ciphertext& a,
                                         const Ciphertext& b) const = 0;

  virtual absl::StatusOr<ParamVector> Decrypt(
      const SecretKey& sk, absl::Span<const Ciphertext> cts,
      size_t original_len) const = 0;

  // Chunk-wise Add over two encrypted vectors of the same layout.
  absl::StatusOr<std::vector<Ciphertext>> AddVectors(
      absl::Span<const Ciphertext> a, absl::Span<const Ciphertext> b) const;
};

absl::StatusOr<std::unique_ptr<HeBackend>> MakeHeBackend(
    HeBackendKind kind, const HeParams& params);

// Length-prefixed binary container: "PAHE", version byte, object kind byte,
// backend byte, params block, payload length, payload. Integers big-endian.
std::string SerializeCiphertext(const Ciphertext& ct);
absl::StatusOr<Ciphertext> DeserializeCiphertext(absl::string_view bytes);
std::string SerializePublicKey(const PublicKey& pk);
absl::StatusOr<PublicKey> DeserializePublicKey(absl::string_view bytes);
std::string SerializeSecretKey(const SecretKey& sk);
absl::StatusOr<SecretKey> DeserializeSecretKey(absl::string_view bytes);

}  // namespace hybridfl

#endif  // HYBRIDFL_HE_BACKEND_H_
