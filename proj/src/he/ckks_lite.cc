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

// ckks-lite: encode / RLWE encrypt / add / decrypt / decode, nothing else.
//
// Encoding packs one real per coefficient: m_j = round(x_j * 2^scale_bits)
// mod q. Secrets and encryption ephemerals are sparse ternary polynomials of
// Hamming weight min(64, N / 2); errors are rounded Gaussians with stddev 3.2.
// A fresh ciphertext decrypts to m + e*u + e1*s + e0, whose coefficients have
// stddev about 3.2 * sqrt(2h + 1) in scaled units.

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "he/backends.h"
#include "he/ntt.h"
#include "hybridfl/rng.h"
#include "hybridfl/status_macros.h"

namespace hybridfl::he_internal {
namespace {

constexpr double kErrorStddev = 3.2;
constexpr int kMaxHammingWeight = 64;

class CkksLiteBackend final : public HeBackend {
 public:
  CkksLiteBackend(const HeParams& params, NttTables tables)
      : params_(params),
        tables_(std::move(tables)),
        q_(tables_.modulus()),
        n_(params.slot_count()),
        hamming_weight_(std::min<int>(kMaxHammingWeight, params.ring_degree / 2)),
        scale_(std::ldexp(1.0, params.scale_bits)) {}

  HeBackendKind kind() const override { return HeBackendKind::kCkksLite; }
  const HeParams& params() const override { return params_; }

  double DecodeTolerance() const override {
    const double fresh_stddev =
        kErrorStddev * std::sqrt(2.0 * hamming_weight_ + 1.0);
    return (8.0 * fresh_stddev + 1.0) / scale_;
  }

  absl::StatusOr<KeyPair> KeyGen(uint64_t seed) const override {
    Rng rng(seed);
    std::vector<uint64_t> s = SampleTernary(rng);
    std::vector<uint64_t> a(n_);
    for (uint64_t& x : a) x = rng.UniformIndex(q_);
    std::vector<uint64_t> e = SampleError(rng);
    tables_.Forward(absl::MakeSpan(s));
    tables_.Forward(absl::MakeSpan(a));
    tables_.Forward(absl::MakeSpan(e));
    // b = -a*s + e
    std::vector<uint64_t> b(n_);
    for (size_t i = 0; i < n_; ++i) {
      b[i] = SubMod(e[i], MulMod(a[i], s[i], q_), q_);
    }
    const uint64_t key_id = Mix64(seed ^ 0x5045484b45595344ULL);
    KeyPair kp;
    kp.public_key = {.backend = kind(),
                     .params = params_,
                     .key_id = key_id,
                     .b = std::move(b),
                     .a = std::move(a)};
    kp.secret_key = {
        .backend = kind(), .params = params_, .key_id = key_id,
        .s = std::move(s)};
    return kp;
  }

  absl::StatusOr<std::vector<Ciphertext>> Encrypt(
      const PublicKey& pk, absl::Span<const double> x,
      uint64_t seed) const override {
    RETURN_IF_ERROR(CheckKey(pk.backend, pk.params));
    if (pk.a.size() != n_ || pk.b.size() != n_) {
      return absl::InvalidArgumentError("malformed ckks-lite public key");
    }
    RETURN_IF_ERROR(CheckEncodable(params_, x));
    Rng rng(seed);
    std::vector<Ciphertext> out;
    for (size_t offset = 0; offset < x.size(); offset += n_) {
      const size_t len = std::min(n_, x.size() - offset);
      out.push_back(EncryptChunk(pk, x.subspan(offset, len), rng));
    }
    return out;
  }

  absl::StatusOr<Ciphertext> Add(const Ciphertext& a,
                                 const Ciphertext& b) const override {
    RETURN_IF_ERROR(CheckAddable(kind(), params_, a, b));
    const auto* pa = std::get_if<RlwePayload>(&a.payload);
    const auto* pb = std::get_if<RlwePayload>(&b.payload);
    if (pa == nullptr || pb == nullptr || !WellFormed(*pa) ||
        !WellFormed(*pb)) {
      return absl::InvalidArgumentError("malformed ckks-lite ciphertext");
    }
    RlwePayload sum{.c0 = std::vector<uint64_t>(n_),
                    .c1 = std::vector<uint64_t>(n_)};
    for (size_t i = 0; i < n_; ++i) {
      sum.c0[i] = AddMod(pa->c0[i], pb->c0[i], q_);
      sum.c1[i] = AddMod(pa->c1[i], pb->c1[i], q_);
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
    RETURN_IF_ERROR(CheckKey(sk.backend, sk.params));
    if (sk.s.size() != n_) {
      return absl::InvalidArgumentError("malformed ckks-lite secret key");
    }
    RETURN_IF_ERROR(CheckDecryptLayout(kind(), params_, cts, original_len));
    ParamVector out;
    out.reserve(original_len);
    std::vector<uint64_t> m(n_);
    for (const Ciphertext& ct : cts) {
      const auto* p = std::get_if<RlwePayload>(&ct.payload);
      if (p == nullptr || !WellFormed(*p)) {
        return absl::InvalidArgumentError("malformed ckks-lite ciphertext");
      }
      // m = c0 + c1 * s
      std::copy(p->c1.begin(), p->c1.end(), m.begin());
      tables_.Forward(absl::MakeSpan(m));
      for (size_t i = 0; i < n_; ++i) m[i] = MulMod(m[i], sk.s[i], q_);
      tables_.Inverse(absl::MakeSpan(m));
      for (int i = 0; i < ct.slots_used && out.size() < original_len; ++i) {
        out.push_back(Decode(AddMod(m[i], p->c0[i], q_)));
      }
    }
    return out;
  }

 private:
  absl::Status CheckKey(HeBackendKind backend, const HeParams& params) const {
    if (backend != kind()) {
      return absl::InvalidArgumentError("key belongs to a different backend");
    }
    if (!(params == params_)) {
      return absl::InvalidArgumentError("key parameter mismatch");
    }
    return absl::OkStatus();
  }

  bool WellFormed(const RlwePayload& p) const {
    return p.c0.size() == n_ && p.c1.size() == n_;
  }

  uint64_t FromSigned(int64_t v) const {
    return v >= 0 ? static_cast<uint64_t>(v) % q_
                  : q_ - static_cast<uint64_t>(-v) % q_;
  }

  std::vector<uint64_t> SampleTernary(Rng& rng) const {
    std::vector<uint64_t> out(n_, 0);
    for (size_t idx : rng.SampleWithoutReplacement(n_, hamming_weight_)) {
      out[idx] = (rng.NextU64() & 1) ? 1 : q_ - 1;
    }
    return out;
  }

  std::vector<uint64_t> SampleError(Rng& rng) const {
    std::vector<uint64_t> out(n_);
    for (uint64_t& x : out) {
      x = FromSigned(
          static_cast<int64_t>(std::llround(kErrorStddev * rng.Gaussian())));
    }
    return out;
  }

  uint64_t Encode(double x) const {
    return FromSigned(static_cast<int64_t>(std::llround(x * scale_)));
  }

  double Decode(uint64_t v) const {
    const int64_t centered = v > q_ / 2 ? -static_cast<int64_t>(q_ - v)
                                        : static_cast<int64_t>(v);
    return static_cast<double>(centered) / scale_;
  }

  Ciphertext EncryptChunk(const PublicKey& pk, absl::Span<const double> x,
                          Rng& rng) const {
    std::vector<uint64_t> u = SampleTernary(rng);
    std::vector<uint64_t> e0 = SampleError(rng);
    std::vector<uint64_t> e1 = SampleError(rng);
    tables_.Forward(absl::MakeSpan(u));
    RlwePayload p{.c0 = std::vector<uint64_t>(n_),
                  .c1 = std::vector<uint64_t>(n_)};
    for (size_t i = 0; i < n_; ++i) {
      p.c0[i] = MulMod(pk.b[i], u[i], q_);
      p.c1[i] = MulMod(pk.a[i], u[i], q_);
    }
    tables_.Inverse(absl::MakeSpan(p.c0));
    tables_.Inverse(absl::MakeSpan(p.c1));
    for (size_t i = 0; i < n_; ++i) {
      const uint64_t m = i < x.size() ? Encode(x[i]) : 0;
      p.c0[i] = AddMod(AddMod(p.c0[i], e0[i], q_), m, q_);
      p.c1[i] = AddMod(p.c1[i], e1[i], q_);
    }
    return Ciphertext{.backend = kind(),
                      .params = params_,
                      .slots_used = static_cast<int>(x.size()),
                      .add_count = 0,
                      .payload = std::move(p)};
  }

  HeParams params_;
  NttTables tables_;
  uint64_t q_;
  size_t n_;
  int hamming_weight_;
  double scale_;
};

}  // namespace

absl::StatusOr<std::unique_ptr<HeBackend>> MakeCkksLiteBackend(
    const HeParams& params) {
  ASSIGN_OR_RETURN(uint64_t q,
                   FindNttPrime(params.modulus_bits, params.slot_count()));
  ASSIGN_OR_RETURN(NttTables tables, NttTables::Create(params.slot_count(), q));
  return std::unique_ptr<HeBackend>(
      new CkksLiteBackend(params, std::move(tables)));
}

}  // namespace hybridfl::he_internal
