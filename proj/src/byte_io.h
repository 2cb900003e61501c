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

// Big-endian byte writer/reader for the wire formats.

#ifndef HYBRIDFL_BYTE_IO_H_
#define HYBRIDFL_BYTE_IO_H_

#include <cstdint>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace hybridfl::internal {

class ByteWriter {
 public:
  void PutU8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void PutU32(uint32_t v) { PutBigEndian(v, 4); }
  void PutU64(uint64_t v) { PutBigEndian(v, 8); }
  void PutBytes(absl::string_view bytes) { out_.append(bytes.data(), bytes.size()); }

  size_t size() const { return out_.size(); }
  std::string Release() && { return std::move(out_); }

 private:
  void PutBigEndian(uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }

  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(absl::string_view in) : in_(in) {}

  absl::StatusOr<uint8_t> U8() {
    auto v = BigEndian(1);
    if (!v.ok()) return v.status();
    return static_cast<uint8_t>(*v);
  }
  absl::StatusOr<uint32_t> U32() {
    auto v = BigEndian(4);
    if (!v.ok()) return v.status();
    return static_cast<uint32_t>(*v);
  }
  absl::StatusOr<uint64_t> U64() { return BigEndian(8); }

  absl::StatusOr<absl::string_view> Bytes(size_t n) {
    if (in_.size() - pos_ < n) return Truncated();
    absl::string_view out = in_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  size_t remaining() const { return in_.size() - pos_; }

 private:
  static absl::Status Truncated() {
    return absl::DataLossError("truncated input");
  }

  absl::StatusOr<uint64_t> BigEndian(int width) {
    if (in_.size() - pos_ < static_cast<size_t>(width)) return Truncated();
    uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v = (v << 8) | static_cast<uint8_t>(in_[pos_++]);
    }
    return v;
  }

  absl::string_view in_;
  size_t pos_ = 0;
};

}  // namespace hybridfl::internal

#endif  // HYBRIDFL_BYTE_IO_H_
