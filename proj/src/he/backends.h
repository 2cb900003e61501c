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

#ifndef HYBRIDFL_HE_BACKENDS_H_
#define HYBRIDFL_HE_BACKENDS_H_

#include <memory>

#include "absl/status/statusor.h"
#include "hybridfl/he_backend.h"

namespace hybridfl::he_internal {

absl::StatusOr<std::unique_ptr<HeBackend>> MakeCkksLiteBackend(
    const HeParams& params);
std::unique_ptr<HeBackend> MakeMockBackend(const HeParams& params);

// Contract checks shared by both backends.
absl::Status CheckEncodable(const HeParams& params,
                            absl::Span<const double> x);
absl::Status CheckAddable(HeBackendKind kind, const HeParams& params,
                          const Ciphertext& a, const Ciphertext& b);
absl::Status CheckDecryptLayout(HeBackendKind kind, const HeParams& params,
                                absl::Span<const Ciphertext> cts,
                                size_t original_len);

}  // namespace hybridfl::he_internal

#endif  // HYBRIDFL_HE_BACKENDS_H_
