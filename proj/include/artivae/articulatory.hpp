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

#ifndef ARTIVAE_ARTICULATORY_HPP_
#define ARTIVAE_ARTICULATORY_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "artivae/matrix.hpp"
#include "artivae/numerics.hpp"

namespace artivae {

// Midsagittal EMA coil groups in canonical column order:
// jaw, tongue tip, tongue blade, tongue dorsum, upper lip, lower lip,
// optionally velum; two coordinates (x, y) per group.
struct CoilLayout {
  bool has_velum = false;

  static constexpr std::size_t kJaw = 0;
  static constexpr std::size_t kTongueTip = 2;
  static constexpr std::size_t kTongueBlade = 4;
  static constexpr std::size_t kTongueDorsum = 6;
  static constexpr std::size_t kUpperLip = 8;
  static constexpr std::size_t kLowerLip = 10;
  static constexpr std::size_t kVelum = 12;

  std::size_t dims() const { return has_velum ? 14 : 12; }
  std::size_t n_params() const { return has_velum ? 7 : 6; }

  // jaw_x, jaw_y, tt_x, tt_y, tb_x, tb_y, td_x, td_y, ul_x, ul_y,
  // ll_x, ll_y [, vl_x, vl_y]
  std::vector<std::string> column_names() const;
  std::vector<std::string> param_names() const;

  static CoilLayout standard(bool with_velum) { return CoilLayout{with_velum}; }
  // Validates that `names` match the canonical order; throws otherwise.
  static CoilLayout from_columns(const std::vector<std::string>& names);
};

// One 100 Hz sample of midsagittal coil coordinates (mm).
struct EmaFrame {
  std::vector<double> coords;
  double time_s = 0.0;
};

// Standardized articulatory parameters, ordered
// [JH, TB, TD, TT, LP, LH] or [JH, TB, TD, TT, LP, LH, VL].
struct ArticulatoryVector {
  std::vector<double> params;
};

// Linear maps between coil space and the articulatory parameter space, built
// by the staged guided-PCA fit. `fwd` maps a coil vector to standardized
// parameters; `inv` is the minimum-norm right inverse, so a -> y -> a is the
// identity and y -> a -> y is the orthogonal projection onto the model
// subspace.
struct GuidedPcaModel {
  CoilLayout layout;

  Matrix fwd;                      // n_params x dims
  std::vector<double> fwd_offset;  // n_params
  Matrix inv;                      // dims x n_params
  std::vector<double> inv_offset;  // dims (training mean frame)

  // Stage detail, kept for the model file and for inspection.
  PcaResult jaw_pca;               // on jaw coords
  OlsResult reg_jaw_tongue;        // JH -> 6 tongue coords
  PcaResult tongue_body_pca;       // PC1/PC2 of residual blade+dorsum
  OlsResult reg_body_tip;          // (TB, TD) -> residual tip coords
  PcaResult tongue_tip_pca;
  OlsResult reg_jaw_lips;          // JH -> 4 lip coords
  PcaResult lip_protrusion_pca;    // on residual lip x coords
  OlsResult reg_protrusion_aperture;  // LP -> residual lip y coords
  PcaResult lip_height_pca;
  PcaResult velum_pca;             // only when layout.has_velum

  std::vector<double> param_mean;   // pre-standardization score means
  std::vector<double> param_scale;  // pre-standardization score stddevs
};

// Runs the staged guided-PCA procedure over the corpus: jaw PC first, then
// tongue body/dorsum and tongue tip on jaw-freed residuals, then lips, then
// velum. Throws with the stage name on degenerate input.
GuidedPcaModel fit_guided_pca(const std::vector<EmaFrame>& frames,
                              const CoilLayout& layout);

ArticulatoryVector ema_to_artic(const GuidedPcaModel& model,
                                const EmaFrame& frame);
EmaFrame artic_to_ema(const GuidedPcaModel& model,
                      const ArticulatoryVector& a);

// Applies the forward map to many frames at once; rows are parameters
// vectors in frame order.
Matrix ema_to_artic_batch(const GuidedPcaModel& model,
                          const std::vector<EmaFrame>& frames);

// CSV: header "time_s,<column names>", one frame per row at 100 Hz.
void write_ema_csv(const std::string& path, const std::vector<EmaFrame>& frames,
                   const CoilLayout& layout);
struct EmaCsv {
  std::vector<EmaFrame> frames;
  CoilLayout layout;
};
EmaCsv read_ema_csv(const std::string& path);

// Model file (JSON, format "artivae-gpca-v1").
void save_gpca_model(const std::string& path, const GuidedPcaModel& model);
GuidedPcaModel load_gpca_model(const std::string& path);

}  // namespace artivae

#endif  // ARTIVAE_ARTICULATORY_HPP_
