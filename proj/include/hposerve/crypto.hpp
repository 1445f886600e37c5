// Copyright 2026 The hposerve Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hposerve::crypto {

using Sha256 = std::array<std::uint8_t, 32>;

Sha256 sha256(std::span<const std::uint8_t> bytes);
Sha256 sha256(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> bytes);

/// Cryptographically secure random bytes. Throws std::runtime_error if the
/// system generator fails.
std::vector<std::uint8_t> random_bytes(std::size_t count);

/// RFC 4648 section 5 alphabet, no padding.
std::string base64url(std::span<const std::uint8_t> bytes);

bool constant_time_equal(std::span<const std::uint8_t> a,
                         std::span<const std::uint8_t> b);

}  // namespace hposerve::crypto
