/*
 * Copyright 2026 The SEAN Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sean/evaluate.hpp"
#include "sean/phantom.hpp"

namespace sean {

inline constexpr int kDatasetFormatVersion = 1;

/// Case id of the k-th phantom of a generated dataset.
std::string case_id(std::size_t k);

/// Generates `num` phantoms into dir/cases/ and writes dir/manifest.json.
/// Phantom k uses seed mix_seed(seed, k).
void write_dataset(const std::filesystem::path& dir, const PhantomSpec& spec, std::size_t num, std::uint64_t seed);

/// Reads manifest.json and every case it lists; masks are required.
std::vector<EvalCase> read_dataset(const std::filesystem::path& dir);

}  // namespace sean
