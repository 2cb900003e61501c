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

#include "hybridfl/partition_voting.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "byte_io.h"
#include "hybridfl/rng.h"
#include "hybridfl/status_macros.h"

namespace hybridfl {
namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};

// AES-128-ECB over whole 16-byte blocks, no padding.
absl::StatusOr<std::vector<uint8_t>> AesBlocks(const VoteKey& key,
                                               absl::Span<const uint8_t> in,
                                               bool encrypt) {
  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  if (ctx == nullptr) return absl::InternalError("EVP_CIPHER_CTX_new failed");
  if (EVP_CipherInit_ex(ctx.get(), EVP_aes_128_ecb(), nullptr, key.key.data(),
                        nullptr, encrypt ? 1 : 0) != 1) {
    return absl::InternalError("AES key setup failed");
  }
  EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
  std::vector<uint8_t> out(in.size() + kVoteTokenSize);
  int len = 0;
  if (!in.empty() &&
      EVP_CipherUpdate(ctx.get(), out.data(), &len, in.data(),
                       static_cast<int>(in.size())) != 1) {
    return absl::InternalError("AES block operation failed");
  }
  int tail = 0;
  if (EVP_CipherFinal_ex(ctx.get(), out.data() + len, &tail) != 1) {
    return absl::InternalError("AES finalization failed");
  }
  out.resize(static_cast<size_t>(len + tail));
  return out;
}

void PutBlock(uint64_t round, uint64_t index, uint8_t* out) {
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<uint8_t>(round >> (56 - 8 * i));
    out[8 + i] = static_cast<uint8_t>(index >> (56 - 8 * i));
  }
}

uint64_t ReadU64(const uint8_t* in) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

}  // namespace

absl::string_view PartitionStrategyName(PartitionStrategy strategy) {
  switch (strategy) {
    case PartitionStrategy::kMaxNorm:
      return "max";
    case PartitionStrategy::kMinNorm:
      return "min";
    case PartitionStrategy::kRandom:
      return "random";
  }
  return "unknown";
}

absl::StatusOr<PartitionStrategy> ParsePartitionStrategy(
    absl::string_view name) {
  if (name == "max") return PartitionStrategy::kMaxNorm;
  if (name == "min") return PartitionStrategy::kMinNorm;
  if (name == "random" || name == "rand") return PartitionStrategy::kRandom;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown partition strategy '", name,
                   "' (expected max, min or random)"));
}

size_t TargetCount(double r, size_t dim) {
  if (!(r > 0.0)) return 0;
  if (r >= 1.0) return dim;
  const double k = std::floor(r * static_cast<double>(dim) + 0.5);
  return std::min(dim, static_cast<size_t>(k));
}

absl::StatusOr<PartitionMask> ProposePartition(absl::Span<const double> u,
                                               double r,
                                               PartitionStrategy strategy,
                                               uint64_t seed) {
  RETURN_IF_ERROR(CheckFinite(u, "update"));
  const size_t dim = u.size();
  const size_t k = TargetCount(r, dim);
  std::vector<size_t> chosen;
  if (strategy == PartitionStrategy::kRandom) {
    Rng rng(seed);
    chosen = rng.SampleWithoutReplacement(dim, k);
  } else {
    std::vector<size_t> order(dim);
    std::iota(order.begin(), order.end(), size_t{0});
    const bool largest = strategy == PartitionStrategy::kMaxNorm;
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](size_t a, size_t b) {
                        const double ma = std::abs(u[a]);
                        const double mb = std::abs(u[b]);
                        if (ma != mb) return largest ? ma > mb : ma < mb;
                        return a < b;
                      });
    order.resize(k);
    chosen = std::move(order);
  }
  std::sort(chosen.begin(), chosen.end());
  return PartitionMask::Create(std::move(chosen), dim);
}

VoteKey VoteKey::Derive(uint64_t experiment_seed, uint64_t round) {
  VoteKey vk;
  Rng rng(DeriveSeed(experiment_seed, StreamTag::kVoteKey));
  for (size_t i = 0; i < vk.key.size(); i += 8) {
    uint64_t word = rng.NextU64();
    for (size_t j = 0; j < 8; ++j) {
      vk.key[i + j] = static_cast<uint8_t>(word >> (8 * j));
    }
  }
  vk.round_binding = round;
  return vk;
}

absl::StatusOr<VoteMessage> EncryptIndices(const PartitionMask& mask,
                                           const VoteKey& key,
                                           uint32_t client_id) {
  auto indices = mask.he_indices();
  std::vector<uint8_t> blocks(indices.size() * kVoteTokenSize);
  for (size_t j = 0; j < indices.size(); ++j) {
    PutBlock(key.round_binding, indices[j], &blocks[j * kVoteTokenSize]);
  }
  ASSIGN_OR_RETURN(std::vector<uint8_t> cipher, AesBlocks(key, blocks, true));
  VoteMessage msg{.client_id = client_id};
  msg.tokens.resize(indices.size());
  for (size_t j = 0; j < indices.size(); ++j) {
    std::copy_n(&cipher[j * kVoteTokenSize], kVoteTokenSize,
                msg.tokens[j].begin());
  }
  return msg;
}

absl::StatusOr<std::vector<VoteToken>> TallyVotes(
    absl::Span<const VoteMessage> messages, int64_t k) {
  if (k < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("tally: k must be >= 0, got ", k));
  }
  std::map<VoteToken, int64_t> counts;
  for (const VoteMessage& msg : messages) {
    std::vector<VoteToken> own = msg.tokens;
    std::sort(own.begin(), own.end());
    if (std::adjacent_find(own.begin(), own.end()) != own.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "client ", msg.client_id, " proposed the same index twice"));
    }
    for (const VoteToken& t : msg.tokens) ++counts[t];
  }
  std::vector<std::pair<VoteToken, int64_t>> ranked(counts.begin(),
                                                    counts.end());
  // counts is ordered by token, so a stable sort on count keeps the
  // lexicographic tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  const size_t take = std::min(ranked.size(), static_cast<size_t>(k));
  std::vector<VoteToken> winners;
  winners.reserve(take);
  for (size_t i = 0; i < take; ++i) winners.push_back(ranked[i].first);
  return winners;
}

absl::StatusOr<PartitionMask> DecodePartition(
    absl::Span<const VoteToken> tokens, const VoteKey& key, size_t dim,
    size_t k) {
  if (k > dim) {
    return absl::InvalidArgumentError(
        absl::StrCat("decode: k = ", k, " exceeds dim ", dim));
  }
  if (tokens.size() > k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "decode: ", tokens.size(), " tokens exceed the target count ", k));
  }
  std::vector<uint8_t> blocks(tokens.size() * kVoteTokenSize);
  for (size_t j = 0; j < tokens.size(); ++j) {
    std::copy(tokens[j].begin(), tokens[j].end(), &blocks[j * kVoteTokenSize]);
  }
  ASSIGN_OR_RETURN(std::vector<uint8_t> plain, AesBlocks(key, blocks, false));
  std::vector<bool> selected(dim, false);
  size_t count = 0;
  for (size_t j = 0; j < tokens.size(); ++j) {
    const uint8_t* block = &plain[j * kVoteTokenSize];
    const uint64_t round = ReadU64(block);
    const uint64_t index = ReadU64(block + 8);
    if (round != key.round_binding || index >= dim) {
      return absl::FailedPreconditionError(absl::StrCat(
          "protocol error: token ", j, " was not produced under this round's"
          " vote key"));
    }
    if (selected[index]) {
      return absl::FailedPreconditionError("protocol error: duplicate token");
    }
    selected[index] = true;
    ++count;
  }
  for (size_t i = 0; i < dim && count < k; ++i) {
    if (!selected[i]) {
      selected[i] = true;
      ++count;
    }
  }
  std::vector<size_t> he;
  he.reserve(k);
  for (size_t i = 0; i < dim; ++i) {
    if (selected[i]) he.push_back(i);
  }
  return PartitionMask::Create(std::move(he), dim);
}

std::string EncodeVoteMessage(const VoteMessage& message) {
  internal::ByteWriter w;
  w.PutU32(message.client_id);
  w.PutU32(static_cast<uint32_t>(message.tokens.size()));
  for (const VoteToken& t : message.tokens) {
    w.PutBytes(absl::string_view(reinterpret_cast<const char*>(t.data()),
                                t.size()));
  }
  return std::move(w).Release();
}

absl::StatusOr<VoteMessage> DecodeVoteMessage(absl::string_view bytes) {
  internal::ByteReader r(bytes);
  VoteMessage msg;
  ASSIGN_OR_RETURN(msg.client_id, r.U32());
  ASSIGN_OR_RETURN(uint32_t count, r.U32());
  if (r.remaining() != static_cast<size_t>(count) * kVoteTokenSize) {
    return absl::DataLossError(absl::StrCat(
        "vote message declares ", count, " tokens but carries ",
        r.remaining(), " token bytes"));
  }
  msg.tokens.resize(count);
  for (VoteToken& t : msg.tokens) {
    ASSIGN_OR_RETURN(absl::string_view raw, r.Bytes(kVoteTokenSize));
    std::copy(raw.begin(), raw.end(), t.begin());
  }
  return msg;
}

}  // namespace hybridfl
