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

#ifndef ARTIVAE_VERSION_HPP_
#define ARTIVAE_VERSION_HPP_

namespace artivae {

inline constexpr const char* kToolVersion = "0.1.0";

// On-disk format identifiers, one per file type the tools can emit.
inline constexpr const char* kFormatGpca = "artivae-gpca-v1";
inline constexpr const char* kFormatFeat = "artivae-feat-v1";
inline constexpr const char* kFormatVae = "artivae-vae-v1";

}  // namespace artivae

#endif  // ARTIVAE_VERSION_HPP_
