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

#include <algorithm>

#include "he/backends.h"
#include "hybridfl/rng.h"
#include "hybridfl/status_macros.h"

namespace hybridfl::he_internal {
namespace {

// Plaintext stand-in with the same contracts as ckks-lite and zero decode
// error. Runtime cost is accounted separately through HeCostModel.
class MockBackend final : public HeBackend {
 public:
  explicit MockBackend(const HeParams& params) : params_(params) {}

  HeBackendKind kind() const override { return HeBackendKind::kMock; }
  const HeParams& params() const override { return params_; }
  double DecodeTolerance() const override { return 0.0; }

  absl::StatusOr<KeyPair> KeyGen(uint64_t seed) const override {
    const uint64_t key_id = Mix64(seed ^ 0x4d4f434b4b455953ULL);
    KeyPair kp;
    kp.public_key = {.backend = kind(), .params = params_, .key_id = key_id};
    kp.secret_key = {.backend = kind(), .params = params_, .key_id = key_id};
    return kp;
  }

  absl::StatusOr<std::vector<Ciphertext>> Encrypt(
      const PublicKey& pk, absl::Span<const double> x,
      uint64_t /*seed*/) const override {
    if (pk.backend != kind() || !(pk.params == params_)) {
      return absl::InvalidArgumentError("public key does not match backend");
    }
    RETURN_IF_ERROR(CheckEncodable(params_, x));
    const size_t slots = params_.slot_count();
    std::vector<Ciphertext> out;
    for (size_t offset = 0; offset < x.size(); offset += slots) {
      const size_t len = std::min(slots, x.size() - offset);
      auto chunk = x.subspan(offset, len);
      out.push_back(Ciphertext{
          .backend = kind(),
          .params = params_,
          .slots_used = static_cast<int>(len),
          .add_count = 0,
          .payload = PlainPayload{{chunk.begin(), chunk.end()}}});
    }
    return out;
  }

  absl::StatusOr<Ciphertext> Add(const Ciphertext& a,
                                 const Ciphertext& b) const override {
    RETURN_IF_ERROR(CheckAddable(kind(), params_, a, b));
    const auto* pa = std::get_if<PlainPayload>(&a.payload);
    const auto* pb = std::get_if<PlainPayload>(&b.payload);
    if (pa == nullptr || pb == nullptr ||
        pa->values.size() != static_cast<size_t>(a.slots_used) ||
        pb->values.size() != static_cast<size_t>(b.slots_used)) {
      return absl::InvalidArgumentError("malformed mock ciphertext");
    }
    PlainPayload sum{pa->values};
    for (size_t i = 0; i < sum.values.size(); ++i) {
      sum.values[i] += pb->values[i];
    }
    return Ciphertext{.backend = kind(),
                      .params = params_,
                      .slots_used = a.slots_used,
                      .add_count = a.add_count + b.add_count + 1,
                      .payload = std::move(sum)};
  }

  absl::StatusOr<ParamVector> Decrypt(const SecretKey& sk,
                                      absl::Span<const Ciphertext> cts,
                                      size_t original_len) const override {
    if (sk.backend != kind() || !(sk.params == params_)) {
      return absl::InvalidArgumentError("secret key does not match backend");
    }
    RETURN_IF_ERROR(CheckDecryptLayout(kind(), params_, cts, original_len));
    ParamVector out;
    out.reserve(original_len);
    for (const Ciphertext& ct : cts) {
      const auto* p = std::get_if<PlainPayload>(&ct.payload);
      if (p == nullptr || p->values.size() != static_cast<size_t>(ct.slots_used)) {
        return absl::InvalidArgumentError("malformed mock ciphertext");
      }
      for (double v : p->values) {
        if (out.size() == original_len) break;
        out.push_back(v);
      }
    }
    return out;
  }

 private:
  HeParams params_;
};

}  // namespace

std::unique_ptr<HeBackend> MakeMockBackend(const HeParams& params) {
  return std::make_unique<MockBackend>(params);
}

}  // namespace hybridfl::he_internal
