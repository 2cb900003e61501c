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

#ifndef HYBRIDFL_PARTITION_VOTING_H_
#define HYBRIDFL_PARTITION_VOTING_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"
#include "hybridfl/vec_core.h"

namespace hybridfl {

enum class PartitionStrategy {
  kMaxNorm,  // the k largest |u_j|
  kMinNorm,  // the k smallest |u_j|
  kRandom,   // a uniform k-subset
};

absl::string_view PartitionStrategyName(PartitionStrategy strategy);
absl::StatusOr<PartitionStrategy> ParsePartitionStrategy(absl::string_view name);

// Number of HE-protected coordinates for ratio r: round-half-up of r * dim,
// clamped to [0, dim]. r outside [0, 1] is clamped first.
size_t TargetCount(double r, size_t dim);

// A client's proposal of target_count(r, dim) coordinates. Magnitude ties
// are broken towards the lower index; kRandom draws from Rng(seed).
absl::StatusOr<PartitionMask> ProposePartition(absl::Span<const double> u,
                                               double r,
                                               PartitionStrategy strategy,
                                               uint64_t seed);

// An encrypted index: AES-128 of the 16-byte block
// (round_binding || index), both big-endian u64.
inline constexpr size_t kVoteTokenSize = 16;
using VoteToken = std::array<uint8_t, kVoteTokenSize>;

// Symmetric key shared by the clients and withheld from the server.
struct VoteKey {
  std::array<uint8_t, 16> key{};
  uint64_t round_binding = 0;

  // Per-experiment key material bound to one round.
  static VoteKey Derive(uint64_t experiment_seed, uint64_t round);
};

struct VoteMessage {
  uint32_t client_id = 0;
  std::vector<VoteToken> tokens;

  friend bool operator==(const VoteMessage&, const VoteMessage&) = default;
};

// Deterministic and injective per (key, round): equal indices map to equal
// tokens, which is all the server needs for counting.
absl::StatusOr<VoteMessage> EncryptIndices(const PartitionMask& mask,
                                           const VoteKey& key,
                                           uint32_t client_id);

// Server side. Returns the k most frequent tokens, ties broken by the
// lexicographically smaller token, in that ranking order. Returns fewer than
// k tokens when fewer distinct tokens were proposed. Operates on token bytes
// only.
absl::StatusOr<std::vector<VoteToken>> TallyVotes(
    absl::Span<const VoteMessage> messages, int64_t k);

// Client side. Inverts the tokens, then pads with the smallest unselected
// indices until the mask holds k indices.
absl::StatusOr<PartitionMask> DecodePartition(
    absl::Span<const VoteToken> tokens, const VoteKey& key, size_t dim,
    size_t k);

// Wire format: client_id (u32 BE), token count (u32 BE), tokens.
std::string EncodeVoteMessage(const VoteMessage& message);
absl::StatusOr<VoteMessage> DecodeVoteMessage(absl::string_view bytes);

}  // namespace hybridfl

#endif  // HYBRIDFL_PARTITION_VOTING_H_
