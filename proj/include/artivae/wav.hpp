// Copyright 2026 The Artivae Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ARTIVAE_WAV_HPP_
#define ARTIVAE_WAV_HPP_

#include <string>

#include "artivae/features.hpp"

namespace artivae {

// 16-bit PCM mono only; anything else is an error naming the offending
// field. Samples are scaled by 1/32768 on read and by 32768 (clamped) on
// write, so integer sample values round-trip exactly.
AudioSignal read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioSignal& audio);

}  // namespace artivae

#endif  // ARTIVAE_WAV_HPP_
