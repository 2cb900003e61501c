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
#include <cstring>

#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "byte_io.h"
#include "hybridfl/he_backend.h"
#include "hybridfl/status_macros.h"

namespace hybridfl {
namespace {

using internal::ByteReader;
using internal::ByteWriter;

constexpr absl::string_view kMagic = "PAHE";
constexpr uint8_t kVersion = 1;

enum class ObjectKind : uint8_t {
  kCiphertext = 1,
  kPublicKey = 2,
  kSecretKey = 3,
};

// Payload vectors are a u32 element count followed by u64 words.
void PutWords(ByteWriter& w, const std::vector<uint64_t>& words) {
  w.PutU32(static_cast<uint32_t>(words.size()));
  for (uint64_t x : words) w.PutU64(x);
}

absl::StatusOr<std::vector<uint64_t>> GetWords(ByteReader& r) {
  ASSIGN_OR_RETURN(uint32_t count, r.U32());
  if (r.remaining() / 8 < count) return absl::DataLossError("truncated input");
  std::vector<uint64_t> out(count);
  for (uint64_t& x : out) {
    ASSIGN_OR_RETURN(x, r.U64());
  }
  return out;
}

std::string Wrap(ObjectKind object, HeBackendKind backend,
                 const HeParams& params, std::string payload) {
  ByteWriter w;
  w.PutBytes(kMagic);
  w.PutU8(kVersion);
  w.PutU8(static_cast<uint8_t>(object));
  w.PutU8(static_cast<uint8_t>(backend));
  w.PutU32(static_cast<uint32_t>(params.ring_degree));
  w.PutU32(static_cast<uint32_t>(params.scale_bits));
  w.PutU32(static_cast<uint32_t>(params.modulus_bits));
  w.PutU32(static_cast<uint32_t>(params.max_additions));
  w.PutU64(payload.size());
  w.PutBytes(payload);
  return std::move(w).Release();
}

struct Envelope {
  HeBackendKind backend;
  HeParams params;
  absl::string_view payload;
};

absl::StatusOr<Envelope> Unwrap(absl::string_view bytes, ObjectKind expected) {
  ByteReader r(bytes);
  ASSIGN_OR_RETURN(absl::string_view magic, r.Bytes(kMagic.size()));
  if (magic != kMagic) return absl::DataLossError("bad magic, expected PAHE");
  ASSIGN_OR_RETURN(uint8_t version, r.U8());
  if (version != kVersion) {
    return absl::DataLossError(
        absl::StrCat("unsupported container version ", version));
  }
  ASSIGN_OR_RETURN(uint8_t object, r.U8());
  if (object != static_cast<uint8_t>(expected)) {
    return absl::InvalidArgumentError(
        absl::StrCat("container holds object kind ", object, ", expected ",
                     static_cast<int>(expected)));
  }
  ASSIGN_OR_RETURN(uint8_t backend, r.U8());
  if (backend != static_cast<uint8_t>(HeBackendKind::kCkksLite) &&
      backend != static_cast<uint8_t>(HeBackendKind::kMock)) {
    return absl::DataLossError(absl::StrCat("unknown backend id ", backend));
  }
  Envelope env{.backend = static_cast<HeBackendKind>(backend)};
  ASSIGN_OR_RETURN(uint32_t ring, r.U32());
  ASSIGN_OR_RETURN(uint32_t scale, r.U32());
  ASSIGN_OR_RETURN(uint32_t modulus, r.U32());
  ASSIGN_OR_RETURN(uint32_t max_add, r.U32());
  env.params = {.ring_degree = static_cast<int>(ring),
                .scale_bits = static_cast<int>(scale),
                .modulus_bits = static_cast<int>(modulus),
                .max_additions = static_cast<int>(max_add)};
  RETURN_IF_ERROR(env.params.Validate());
  ASSIGN_OR_RETURN(uint64_t length, r.U64());
  if (length != r.remaining()) {
    return absl::DataLossError(absl::StrCat("payload length ", length,
                                            " does not match the ",
                                            r.remaining(), " bytes present"));
  }
  ASSIGN_OR_RETURN(env.payload, r.Bytes(length));
  return env;
}

}  // namespace

std::string SerializeCiphertext(const Ciphertext& ct) {
  ByteWriter w;
  w.PutU32(static_cast<uint32_t>(ct.slots_used));
  w.PutU32(static_cast<uint32_t>(ct.add_count));
  if (const auto* p = std::get_if<RlwePayload>(&ct.payload)) {
    PutWords(w, p->c0);
    PutWords(w, p->c1);
  } else {
    const auto& plain = std::get<PlainPayload>(ct.payload);
    std::vector<uint64_t> bits;
    bits.reserve(plain.values.size());
    for (double v : plain.values) bits.push_back(std::bit_cast<uint64_t>(v));
    PutWords(w, bits);
  }
  return Wrap(ObjectKind::kCiphertext, ct.backend, ct.params,
              std::move(w).Release());
}

absl::StatusOr<Ciphertext> DeserializeCiphertext(absl::string_view bytes) {
  ASSIGN_OR_RETURN(Envelope env, Unwrap(bytes, ObjectKind::kCiphertext));
  ByteReader r(env.payload);
  Ciphertext ct{.backend = env.backend, .params = env.params};
  ASSIGN_OR_RETURN(uint32_t slots, r.U32());
  ASSIGN_OR_RETURN(uint32_t adds, r.U32());
  if (slots > env.params.slot_count() ||
      adds > static_cast<uint32_t>(env.params.max_additions)) {
    return absl::DataLossError("ciphertext header out of range");
  }
  ct.slots_used = static_cast<int>(slots);
  ct.add_count = static_cast<int>(adds);
  if (env.backend == HeBackendKind::kCkksLite) {
    RlwePayload p;
    ASSIGN_OR_RETURN(p.c0, GetWords(r));
    ASSIGN_OR_RETURN(p.c1, GetWords(r));
    if (p.c0.size() != env.params.slot_count() ||
        p.c1.size() != env.params.slot_count()) {
      return absl::DataLossError("ciphertext polynomial has wrong degree");
    }
    ct.payload = std::move(p);
  } else {
    ASSIGN_OR_RETURN(std::vector<uint64_t> bits, GetWords(r));
    if (bits.size() != slots) {
      return absl::DataLossError("mock ciphertext length mismatch");
    }
    PlainPayload p;
    p.values.reserve(bits.size());
    for (uint64_t b : bits) p.values.push_back(std::bit_cast<double>(b));
    ct.payload = std::move(p);
  }
  if (r.remaining() != 0) return absl::DataLossError("trailing bytes");
  return ct;
}

std::string SerializePublicKey(const PublicKey& pk) {
  ByteWriter w;
  w.PutU64(pk.key_id);
  PutWords(w, pk.b);
  PutWords(w, pk.a);
  return Wrap(ObjectKind::kPublicKey, pk.backend, pk.params,
              std::move(w).Release());
}

absl::StatusOr<PublicKey> DeserializePublicKey(absl::string_view bytes) {
  ASSIGN_OR_RETURN(Envelope env, Unwrap(bytes, ObjectKind::kPublicKey));
  ByteReader r(env.payload);
  PublicKey pk{.backend = env.backend, .params = env.params};
  ASSIGN_OR_RETURN(pk.key_id, r.U64());
  ASSIGN_OR_RETURN(pk.b, GetWords(r));
  ASSIGN_OR_RETURN(pk.a, GetWords(r));
  if (r.remaining() != 0) return absl::DataLossError("trailing bytes");
  return pk;
}

std::string SerializeSecretKey(const SecretKey& sk) {
  ByteWriter w;
  w.PutU64(sk.key_id);
  PutWords(w, sk.s);
  return Wrap(ObjectKind::kSecretKey, sk.backend, sk.params,
              std::move(w).Release());
}

absl::StatusOr<SecretKey> DeserializeSecretKey(absl::string_view bytes) {
  ASSIGN_OR_RETURN(Envelope env, Unwrap(bytes, ObjectKind::kSecretKey));
  ByteReader r(env.payload);
  SecretKey sk{.backend = env.backend, .params = env.params};
  ASSIGN_OR_RETURN(sk.key_id, r.U64());
  ASSIGN_OR_RETURN(sk.s, GetWords(r));
  if (r.remaining() != 0) return absl::DataLossError("trailing bytes");
  return sk;
}

}  // namespace hybridfl
