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

#include "sean/segnet.hpp"

namespace sean {

const char* to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::None: return "none";
    case FusionMode::ImageL1: return "im-l1";
    case FusionMode::FeatureL1: return "ft-l1";
    case FusionMode::FeatureConcat: return "ft-cc";
    case FusionMode::Sea: return "sea";
    case FusionMode::SeaSelfOnly: return "sea-self";
  }
  return "unknown";
}

FusionMode parse_fusion(const std::string& name) {
  for (FusionMode m : {FusionMode::None, FusionMode::ImageL1, FusionMode::FeatureL1, FusionMode::FeatureConcat,
                       FusionMode::Sea, FusionMode::SeaSelfOnly})
    if (name == to_string(m)) return m;
  fail(ErrorKind::Config, "unknown fusion mode '" + name + "' (expected none, im-l1, ft-l1, ft-cc, sea, sea-self)");
}

}  // namespace sean
