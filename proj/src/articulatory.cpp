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

#include "artivae/articulatory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "artivae/version.hpp"

namespace artivae {

namespace {

using nlohmann::json;

// An affine function of the full coil vector: r(y) = rows * y + consts.
// Every stage of the guided-PCA fit is affine in y, so tracking these
// alongside the numeric scores makes the assembled forward matrix exactly
// the composition of the staged procedure.
struct AffineRows {
  Matrix rows;                 // m x dims
  std::vector<double> consts;  // m
};

AffineRows select_columns(std::size_t dims, std::size_t first,
                          std::size_t count) {
  AffineRows s;
  s.rows = Matrix(count, dims);
  s.consts.assign(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) s.rows(i, first + i) = 1.0;
  return s;
}

AffineRows take_rows(const AffineRows& a, const std::vector<std::size_t>& which) {
  AffineRows out;
  out.rows = Matrix(which.size(), a.rows.cols());
  out.consts.resize(which.size());
  for (std::size_t i = 0; i < which.size(); ++i) {
    for (std::size_t j = 0; j < a.rows.cols(); ++j)
      out.rows(i, j) = a.rows(which[i], j);
    out.consts[i] = a.consts[which[i]];
  }
  return out;
}

Matrix evaluate(const AffineRows& a, const Matrix& y) {
  Matrix out;
  matmul_nt(y, a.rows, out);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += a.consts[j];
  return out;
}

// Scores of `pca_rows` principal components applied to an affine input:
// score_k(y) = comp_k . (in(y) - mean).
AffineRows pca_scores(const PcaResult& p, const AffineRows& in,
                      std::size_t n_components) {
  AffineRows out;
  out.rows = Matrix(n_components, in.rows.cols());
  out.consts.resize(n_components);
  for (std::size_t k = 0; k < n_components; ++k) {
    for (std::size_t j = 0; j < in.rows.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t d = 0; d < in.rows.rows(); ++d)
        acc += p.components(k, d) * in.rows(d, j);
      out.rows(k, j) = acc;
    }
    double c = 0.0;
    for (std::size_t d = 0; d < in.rows.rows(); ++d)
      c += p.components(k, d) * (in.consts[d] - p.mean[d]);
    out.consts[k] = c;
  }
  return out;
}

// Residual of `target` after removing the OLS prediction from `predictors`:
// r(y) = target(y) - coef^T predictors(y) - intercept.
AffineRows residual_rows(const AffineRows& target, const AffineRows& predictors,
                         const OlsResult& fit) {
  AffineRows out = target;
  const std::size_t q = target.rows.rows();
  const std::size_t p = predictors.rows.rows();
  for (std::size_t j = 0; j < q; ++j) {
    for (std::size_t k = 0; k < p; ++k) {
      const double c = fit.coefficients(k, j);
      for (std::size_t d = 0; d < target.rows.cols(); ++d)
        out.rows(j, d) -= c * predictors.rows(k, d);
      out.consts[j] -= c * predictors.consts[k];
    }
    out.consts[j] -= fit.intercept[j];
  }
  return out;
}

void check_stage_variance(const Matrix& scores, std::size_t col,
                          const char* stage) {
  double mean = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) mean += scores(i, col);
  mean /= static_cast<double>(scores.rows());
  double var = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    const double d = scores(i, col) - mean;
    var += d * d;
  }
  var /= static_cast<double>(scores.rows() - 1);
  if (!(var > 1e-12))
    throw std::runtime_error(std::string("fit_guided_pca: zero variance at stage ") +
                             stage);
}

OlsResult stage_ols(const Matrix& x, const Matrix& y, const char* stage) {
  try {
    return ols_fit(x, y);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("fit_guided_pca: stage ") + stage +
                             " regression failed: " + e.what());
  }
}

}  // namespace

std::vector<std::string> CoilLayout::column_names() const {
  std::vector<std::string> names = {"jaw_x", "jaw_y", "tt_x", "tt_y",
                                    "tb_x",  "tb_y",  "td_x", "td_y",
                                    "ul_x",  "ul_y",  "ll_x", "ll_y"};
  if (has_velum) {
    names.push_back("vl_x");
    names.push_back("vl_y");
  }
  return names;
}

std::vector<std::string> CoilLayout::param_names() const {
  std::vector<std::string> names = {"JH", "TB", "TD", "TT", "LP", "LH"};
  if (has_velum) names.push_back("VL");
  return names;
}

CoilLayout CoilLayout::from_columns(const std::vector<std::string>& names) {
  for (bool velum : {false, true}) {
    const CoilLayout candidate{velum};
    if (names == candidate.column_names()) return candidate;
  }
  std::string got;
  for (const auto& n : names) got += n + ",";
  throw std::runtime_error(
      "CoilLayout: unrecognized column set '" + got +
      "'; expected jaw_x..ll_y with optional vl_x,vl_y in canonical order");
}

GuidedPcaModel fit_guided_pca(const std::vector<EmaFrame>& frames,
                              const CoilLayout& layout) {
  const std::size_t dims = layout.dims();
  if (frames.size() < 100)
    throw std::runtime_error("fit_guided_pca: need at least 100 frames, got " +
                             std::to_string(frames.size()));
  Matrix y(frames.size(), dims);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].coords.size() != dims)
      throw std::runtime_error(
          "fit_guided_pca: frame " + std::to_string(i) + " has " +
          std::to_string(frames[i].coords.size()) + " coords, layout needs " +
          std::to_string(dims));
    for (std::size_t j = 0; j < dims; ++j) y(i, j) = frames[i].coords[j];
  }
  if (!y.all_finite())
    throw std::runtime_error("fit_guided_pca: non-finite coordinates");

  GuidedPcaModel model;
  model.layout = layout;
  const std::size_t n_params = layout.n_params();

  std::vector<AffineRows> param_affine;
  param_affine.reserve(n_params);

  // Stage 1: JH is the first principal component of the jaw coil.
  const AffineRows sel_jaw = select_columns(dims, CoilLayout::kJaw, 2);
  model.jaw_pca = pca(evaluate(sel_jaw, y), 1);
  AffineRows jh = pca_scores(model.jaw_pca, sel_jaw, 1);
  Matrix jh_scores = evaluate(jh, y);
  check_stage_variance(jh_scores, 0, "jaw");
  param_affine.push_back(jh);

  // Stage 2: remove the jaw contribution from all six tongue coordinates.
  const AffineRows sel_tongue = select_columns(dims, CoilLayout::kTongueTip, 6);
  model.reg_jaw_tongue =
      stage_ols(jh_scores, evaluate(sel_tongue, y), "tongue");
  const AffineRows res_tongue = residual_rows(sel_tongue, jh, model.reg_jaw_tongue);

  // Stage 3: TB and TD are the two first PCs of the jaw-freed blade+dorsum
  // movement.
  const AffineRows res_body = take_rows(res_tongue, {2, 3, 4, 5});
  model.tongue_body_pca = pca(evaluate(res_body, y), 2);
  AffineRows tb_td = pca_scores(model.tongue_body_pca, res_body, 2);
  Matrix tb_td_scores = evaluate(tb_td, y);
  check_stage_variance(tb_td_scores, 0, "tongue body (TB)");
  check_stage_variance(tb_td_scores, 1, "tongue body (TD)");
  param_affine.push_back(take_rows(tb_td, {0}));
  param_affine.push_back(take_rows(tb_td, {1}));

  // Stage 4+5: free the tongue tip of TB/TD as well, then take its PC1.
  const AffineRows res_tip_in = take_rows(res_tongue, {0, 1});
  model.reg_body_tip =
      stage_ols(tb_td_scores, evaluate(res_tip_in, y), "tongue tip");
  const AffineRows res_tip = residual_rows(res_tip_in, tb_td, model.reg_body_tip);
  model.tongue_tip_pca = pca(evaluate(res_tip, y), 1);
  AffineRows tt = pca_scores(model.tongue_tip_pca, res_tip, 1);
  check_stage_variance(evaluate(tt, y), 0, "tongue tip");
  param_affine.push_back(tt);

  // Stage 6: lips. Jaw contribution removed first; LP is PC1 of the
  // protrusion axis (x of both lips), LH is PC1 of the aperture axis after
  // the protrusion component is regressed out.
  const AffineRows sel_lips = select_columns(dims, CoilLayout::kUpperLip, 4);
  model.reg_jaw_lips = stage_ols(jh_scores, evaluate(sel_lips, y), "lips");
  const AffineRows res_lips = residual_rows(sel_lips, jh, model.reg_jaw_lips);

  const AffineRows res_protrusion = take_rows(res_lips, {0, 2});
  model.lip_protrusion_pca = pca(evaluate(res_protrusion, y), 1);
  AffineRows lp = pca_scores(model.lip_protrusion_pca, res_protrusion, 1);
  Matrix lp_scores = evaluate(lp, y);
  check_stage_variance(lp_scores, 0, "lip protrusion");
  param_affine.push_back(lp);

  const AffineRows res_aperture_in = take_rows(res_lips, {1, 3});
  model.reg_protrusion_aperture =
      stage_ols(lp_scores, evaluate(res_aperture_in, y), "lip height");
  const AffineRows res_aperture =
      residual_rows(res_aperture_in, lp, model.reg_protrusion_aperture);
  model.lip_height_pca = pca(evaluate(res_aperture, y), 1);
  AffineRows lh = pca_scores(model.lip_height_pca, res_aperture, 1);
  check_stage_variance(evaluate(lh, y), 0, "lip height");
  param_affine.push_back(lh);

  // Stage 7: velum, straight PC1 of its own coil.
  if (layout.has_velum) {
    const AffineRows sel_velum = select_columns(dims, CoilLayout::kVelum, 2);
    model.velum_pca = pca(evaluate(sel_velum, y), 1);
    AffineRows vl = pca_scores(model.velum_pca, sel_velum, 1);
    check_stage_variance(evaluate(vl, y), 0, "velum");
    param_affine.push_back(vl);
  }

  // Standardize every parameter to zero mean / unit variance over the
  // training corpus, then assemble the composite forward map.
  model.fwd = Matrix(n_params, dims);
  model.fwd_offset.resize(n_params);
  model.param_mean.resize(n_params);
  model.param_scale.resize(n_params);
  const auto stage_names = layout.param_names();
  for (std::size_t p = 0; p < n_params; ++p) {
    const Matrix scores = evaluate(param_affine[p], y);
    double mean = 0.0;
    for (std::size_t i = 0; i < scores.rows(); ++i) mean += scores(i, 0);
    mean /= static_cast<double>(scores.rows());
    double var = 0.0;
    for (std::size_t i = 0; i < scores.rows(); ++i) {
      const double d = scores(i, 0) - mean;
      var += d * d;
    }
    var /= static_cast<double>(scores.rows() - 1);
    if (!(var > 1e-14))
      throw std::runtime_error(
          "fit_guided_pca: zero variance for parameter " + stage_names[p]);
    const double scale = std::sqrt(var);
    model.param_mean[p] = mean;
    model.param_scale[p] = scale;
    for (std::size_t j = 0; j < dims; ++j)
      model.fwd(p, j) = param_affine[p].rows(0, j) / scale;
    model.fwd_offset[p] = (param_affine[p].consts[0] - mean) / scale;
  }

  // Minimum-norm right inverse: inv = fwd^T (fwd fwd^T)^{-1}. With it,
  // y -> a -> y is the orthogonal projection onto the model subspace.
  Matrix gram;
  matmul_nt(model.fwd, model.fwd, gram);
  const Matrix sol = solve_linear(gram, model.fwd);  // n_params x dims
  model.inv = transpose(sol);
  model.inv_offset = col_means(y);

  return model;
}

ArticulatoryVector ema_to_artic(const GuidedPcaModel& model,
                                const EmaFrame& frame) {
  if (frame.coords.size() != model.layout.dims())
    throw std::runtime_error("ema_to_artic: frame has " +
                             std::to_string(frame.coords.size()) +
                             " coords, model needs " +
                             std::to_string(model.layout.dims()));
  ArticulatoryVector a;
  a.params.resize(model.fwd.rows());
  for (std::size_t p = 0; p < model.fwd.rows(); ++p)
    a.params[p] =
        dot(model.fwd.row_span(p), frame.coords) + model.fwd_offset[p];
  return a;
}

EmaFrame artic_to_ema(const GuidedPcaModel& model, const ArticulatoryVector& a) {
  if (a.params.size() != model.fwd.rows())
    throw std::runtime_error("artic_to_ema: vector has " +
                             std::to_string(a.params.size()) +
                             " params, model needs " +
                             std::to_string(model.fwd.rows()));
  EmaFrame frame;
  frame.coords = model.inv_offset;
  for (std::size_t j = 0; j < model.inv.rows(); ++j)
    for (std::size_t p = 0; p < a.params.size(); ++p)
      frame.coords[j] += model.inv(j, p) * a.params[p];
  return frame;
}

Matrix ema_to_artic_batch(const GuidedPcaModel& model,
                          const std::vector<EmaFrame>& frames) {
  Matrix out(frames.size(), model.fwd.rows());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto a = ema_to_artic(model, frames[i]);
    for (std::size_t p = 0; p < a.params.size(); ++p) out(i, p) = a.params[p];
  }
  return out;
}

void write_ema_csv(const std::string& path, const std::vector<EmaFrame>& frames,
                   const CoilLayout& layout) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("write_ema_csv: cannot open " + path);
  f << "time_s";
  for (const auto& name : layout.column_names()) f << "," << name;
  f << "\n";
  char buf[32];
  for (const auto& frame : frames) {
    if (frame.coords.size() != layout.dims())
      throw std::runtime_error("write_ema_csv: frame dimension mismatch");
    std::snprintf(buf, sizeof buf, "%.17g", frame.time_s);
    f << buf;
    for (double v : frame.coords) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      f << "," << buf;
    }
    f << "\n";
  }
  if (!f) throw std::runtime_error("write_ema_csv: write failed");
}

EmaCsv read_ema_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_ema_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("read_ema_csv: empty file " + path);

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header[0] != "time_s")
    throw std::runtime_error("read_ema_csv: first column must be time_s");

  EmaCsv out;
  out.layout = CoilLayout::from_columns(
      std::vector<std::string>(header.begin() + 1, header.end()));
  const std::size_t dims = out.layout.dims();

  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    EmaFrame frame;
    frame.coords.reserve(dims);
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v;
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("read_ema_csv: line " +
                                 std::to_string(line_no) + ": bad number '" +
                                 cell + "'");
      }
      if (col == 0)
        frame.time_s = v;
      else
        frame.coords.push_back(v);
      ++col;
    }
    if (col != dims + 1)
      throw std::runtime_error("read_ema_csv: line " + std::to_string(line_no) +
                               ": expected " + std::to_string(dims + 1) +
                               " fields, got " + std::to_string(col));
    out.frames.push_back(std::move(frame));
  }
  return out;
}

namespace {

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.rows() * m.cols())
    throw std::runtime_error("model file: matrix size mismatch");
  m.data() = data;
  return m;
}

json pca_to_json(const PcaResult& p) {
  return json{{"mean", p.mean},
              {"components", matrix_to_json(p.components)},
              {"explained_variance", p.explained_variance}};
}

PcaResult pca_from_json(const json& j) {
  PcaResult p;
  p.mean = j.at("mean").get<std::vector<double>>();
  p.components = matrix_from_json(j.at("components"));
  p.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  return p;
}

json ols_to_json(const OlsResult& o) {
  return json{{"coefficients", matrix_to_json(o.coefficients)},
              {"intercept", o.intercept}};
}

OlsResult ols_from_json(const json& j) {
  OlsResult o;
  o.coefficients = matrix_from_json(j.at("coefficients"));
  o.intercept = j.at("intercept").get<std::vector<double>>();
  return o;
}

}  // namespace

void save_gpca_model(const std::string& path, const GuidedPcaModel& model) {
  json j;
  j["format"] = kFormatGpca;
  j["layout"] = json{{"has_velum", model.layout.has_velum}};
  j["forward"] = matrix_to_json(model.fwd);
  j["forward_offset"] = model.fwd_offset;
  j["inverse"] = matrix_to_json(model.inv);
  j["inverse_offset"] = model.inv_offset;
  j["param_mean"] = model.param_mean;
  j["param_scale"] = model.param_scale;
  j["stages"] = json{
      {"jaw_pca", pca_to_json(model.jaw_pca)},
      {"reg_jaw_tongue", ols_to_json(model.reg_jaw_tongue)},
      {"tongue_body_pca", pca_to_json(model.tongue_body_pca)},
      {"reg_body_tip", ols_to_json(model.reg_body_tip)},
      {"tongue_tip_pca", pca_to_json(model.tongue_tip_pca)},
      {"reg_jaw_lips", ols_to_json(model.reg_jaw_lips)},
      {"lip_protrusion_pca", pca_to_json(model.lip_protrusion_pca)},
      {"reg_protrusion_aperture", ols_to_json(model.reg_protrusion_aperture)},
      {"lip_height_pca", pca_to_json(model.lip_height_pca)},
  };
  if (model.layout.has_velum)
    j["stages"]["velum_pca"] = pca_to_json(model.velum_pca);

  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("save_gpca_model: cannot open " + path);
  f << j.dump(2) << "\n";
  if (!f) throw std::runtime_error("save_gpca_model: write failed");
}

GuidedPcaModel load_gpca_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_gpca_model: cannot open " + path);
  json j;
  f >> j;
  if (j.at("format").get<std::string>() != kFormatGpca)
    throw std::runtime_error("load_gpca_model: unexpected format '" +
                             j.at("format").get<std::string>() + "'");
  GuidedPcaModel model;
  model.layout.has_velum = j.at("layout").at("has_velum").get<bool>();
  model.fwd = matrix_from_json(j.at("forward"));
  model.fwd_offset = j.at("forward_offset").get<std::vector<double>>();
  model.inv = matrix_from_json(j.at("inverse"));
  model.inv_offset = j.at("inverse_offset").get<std::vector<double>>();
  model.param_mean = j.at("param_mean").get<std::vector<double>>();
  model.param_scale = j.at("param_scale").get<std::vector<double>>();
  const auto& stages = j.at("stages");
  model.jaw_pca = pca_from_json(stages.at("jaw_pca"));
  model.reg_jaw_tongue = ols_from_json(stages.at("reg_jaw_tongue"));
  model.tongue_body_pca = pca_from_json(stages.at("tongue_body_pca"));
  model.reg_body_tip = ols_from_json(stages.at("reg_body_tip"));
  model.tongue_tip_pca = pca_from_json(stages.at("tongue_tip_pca"));
  model.reg_jaw_lips = ols_from_json(stages.at("reg_jaw_lips"));
  model.lip_protrusion_pca = pca_from_json(stages.at("lip_protrusion_pca"));
  model.reg_protrusion_aperture =
      ols_from_json(stages.at("reg_protrusion_aperture"));
  model.lip_height_pca = pca_from_json(stages.at("lip_height_pca"));
  if (model.layout.has_velum)
    model.velum_pca = pca_from_json(stages.at("velum_pca"));
  return model;
}

}  // namespace artivae
