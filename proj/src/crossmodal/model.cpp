// Copyright 2026 The vilco Authors.
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

#include "vilco/crossmodal/model.hpp"

#include <cmath>

#include "vilco/error.hpp"
#include "vilco/numkit/layers.hpp"
#include "vilco/numkit/ops.hpp"

namespace vilco::xm {

using num::Graph;
using num::Var;

namespace {

std::string layer_name(std::size_t l) { return "fuse" + std::to_string(l); }

// k=3 convolution weights, scaled like a Xavier linear over the kernel window.
num::Tensor conv_weight(std::size_t cin, std::size_t cout, num::Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(3 * cin + cout));
  std::uniform_real_distribution<double> dist(-limit, limit);
  num::Tensor w(num::Shape{3, cin, cout});
  for (auto& x : w.data()) x = dist(rng);
  return w;
}

void init_conv(num::ParamSet& ps, const std::string& prefix, std::size_t cin, std::size_t cout,
               num::Rng& rng) {
  ps.add(prefix + ".w", conv_weight(cin, cout, rng));
  ps.add(prefix + ".b", num::Tensor(num::Shape{cout}));
}

Var conv(Graph& g, const std::string& prefix, Var x, std::size_t stride) {
  return num::conv1d(x, g.param(prefix + ".w"), g.param(prefix + ".b"), stride);
}

}  // namespace

void FusionConfig::validate() const {
  if (model_dim == 0 || heads == 0 || model_dim % heads != 0) {
    throw ConfigError("model_dim must be a positive multiple of heads");
  }
  if (pyramid_levels == 0) throw ConfigError("pyramid_levels must be >= 1");
  if (num_classes == 0) throw ConfigError("num_classes must be >= 1");
  if (video_dim == 0 || text_dim == 0) throw ConfigError("input dims must be >= 1");
  if (mlp_ratio == 0) throw ConfigError("mlp_ratio must be >= 1");
}

nlohmann::json fusion_config_to_json(const FusionConfig& c) {
  return {{"video_dim", c.video_dim},         {"text_dim", c.text_dim},
          {"model_dim", c.model_dim},         {"heads", c.heads},
          {"fusion_layers", c.fusion_layers}, {"pyramid_levels", c.pyramid_levels},
          {"num_classes", c.num_classes},     {"mlp_ratio", c.mlp_ratio},
          {"ln_eps", c.ln_eps}};
}

FusionConfig fusion_config_from_json(const nlohmann::json& j, FusionConfig c) {
  c.video_dim = j.value("video_dim", c.video_dim);
  c.text_dim = j.value("text_dim", c.text_dim);
  c.model_dim = j.value("model_dim", c.model_dim);
  c.heads = j.value("heads", c.heads);
  c.fusion_layers = j.value("fusion_layers", c.fusion_layers);
  c.pyramid_levels = j.value("pyramid_levels", c.pyramid_levels);
  c.num_classes = j.value("num_classes", c.num_classes);
  c.mlp_ratio = j.value("mlp_ratio", c.mlp_ratio);
  c.ln_eps = j.value("ln_eps", c.ln_eps);
  return c;
}

void init_model(num::ParamSet& ps, const FusionConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  num::Rng rng(seed);
  const std::size_t d = cfg.model_dim;
  init_conv(ps, "video_embed", cfg.video_dim, d, rng);
  num::init_linear(ps, "text_proj", cfg.text_dim, d, rng);
  num::init_layer_norm(ps, "video_ln", d);
  for (std::size_t l = 0; l < cfg.fusion_layers; ++l) {
    const auto p = layer_name(l);
    num::init_layer_norm(ps, p + ".ln1", d);
    num::init_attention(ps, p + ".att", d, rng);
    num::init_layer_norm(ps, p + ".ln2", d);
    num::init_linear(ps, p + ".mlp1", d, cfg.mlp_ratio * d, rng);
    num::init_linear(ps, p + ".mlp2", cfg.mlp_ratio * d, d, rng);
  }
  num::init_layer_norm(ps, "fused_ln", d);
  for (std::size_t l = 1; l < cfg.pyramid_levels; ++l) {
    init_conv(ps, "pyr" + std::to_string(l) + ".conv", d, d, rng);
    num::init_layer_norm(ps, "pyr" + std::to_string(l) + ".ln", d);
  }
  init_conv(ps, "cls.hidden", d, d, rng);
  num::init_linear(ps, "cls.out", d, cfg.num_classes, rng);
  // Background prior: sigmoid(bias) ~ 0.01 keeps the focal loss stable at start.
  for (auto& b : ps.value("cls.out.b").data()) b = -std::log((1.0 - 0.01) / 0.01);
  init_conv(ps, "reg.hidden", d, d, rng);
  num::init_linear(ps, "reg.out", d, 2, rng);
}

Var project_query(Graph& g, const FusionConfig& cfg,
                  const std::vector<std::vector<double>>& tokens) {
  if (tokens.empty()) throw ShapeError("query has no tokens");
  num::Tensor t(num::Shape{tokens.size(), cfg.text_dim});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].size() != cfg.text_dim) {
      throw ShapeError("query token dim " + std::to_string(tokens[i].size()) + " != text_dim " +
                       std::to_string(cfg.text_dim));
    }
    std::copy(tokens[i].begin(), tokens[i].end(), t.row(i).begin());
  }
  return num::linear(g, "text_proj", g.constant(std::move(t)));
}

PyramidFeatures encode_fuse(Graph& g, const FusionConfig& cfg, const data::FeatureSequence& video,
                            Var query_block) {
  if (video.dim() != cfg.video_dim) {
    throw ShapeError("video feature dim " + std::to_string(video.dim()) + " != video_dim " +
                     std::to_string(cfg.video_dim));
  }
  if (query_block.value().cols() != cfg.model_dim) {
    throw ShapeError("query block width differs from model_dim");
  }
  const std::size_t nq = query_block.value().rows();
  const std::size_t t = video.length();

  Var v = conv(g, "video_embed", g.constant(video.data), 1);
  v = num::layer_norm(g, "video_ln", v, cfg.ln_eps);
  Var x = num::concat_rows({query_block, v});
  for (std::size_t l = 0; l < cfg.fusion_layers; ++l) {
    const auto p = layer_name(l);
    Var h = num::layer_norm(g, p + ".ln1", x, cfg.ln_eps);
    x = num::add(x, num::attention(g, p + ".att", h, h, cfg.heads));
    h = num::layer_norm(g, p + ".ln2", x, cfg.ln_eps);
    h = num::linear(g, p + ".mlp2", num::gelu(num::linear(g, p + ".mlp1", h)));
    x = num::add(x, h);
  }
  Var level = num::layer_norm(g, "fused_ln", num::slice_rows(x, nq, nq + t), cfg.ln_eps);

  PyramidFeatures pyr;
  pyr.duration_s = video.duration();
  pyr.video_tokens = v;
  pyr.levels.push_back(level);
  pyr.strides_s.push_back(video.clip_stride_s);
  for (std::size_t l = 1; l < cfg.pyramid_levels; ++l) {
    const auto p = "pyr" + std::to_string(l);
    level = num::layer_norm(g, p + ".ln", num::gelu(conv(g, p + ".conv", level, 2)), cfg.ln_eps);
    pyr.levels.push_back(level);
    pyr.strides_s.push_back(pyr.strides_s.back() * 2.0);
  }
  return pyr;
}

DenseOutputs predict_moments(Graph& g, const FusionConfig& cfg, const PyramidFeatures& pyr) {
  std::vector<Var> cls_hidden, reg_hidden;
  DenseOutputs out;
  out.duration_s = pyr.duration_s;
  for (std::size_t l = 0; l < pyr.levels.size(); ++l) {
    cls_hidden.push_back(num::gelu(conv(g, "cls.hidden", pyr.levels[l], 1)));
    reg_hidden.push_back(num::gelu(conv(g, "reg.hidden", pyr.levels[l], 1)));
    for (std::size_t t = 0; t < pyr.levels[l].value().rows(); ++t) {
      out.points.push_back({l, t, pyr.strides_s[l]});
    }
  }
  out.logits = num::linear(g, "cls.out", num::concat_rows(cls_hidden));
  out.offsets = num::softplus(num::linear(g, "reg.out", num::concat_rows(reg_hidden)));
  if (out.logits.value().cols() != cfg.num_classes) throw ShapeError("class head width mismatch");
  return out;
}

DenseValues values_of(const DenseOutputs& d) {
  return {d.logits.value(), d.offsets.value(), d.points, d.duration_s};
}

}  // namespace vilco::xm
