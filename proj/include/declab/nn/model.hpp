#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "declab/common.hpp"

namespace declab::nn {

struct SequenceTooLong : std::runtime_error {
  explicit SequenceTooLong(const std::string& m) : std::runtime_error(m) {}
};

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& m) : std::runtime_error(m) {}
};

struct NonFiniteLoss : std::runtime_error {
  NonFiniteLoss() : std::runtime_error("training loss is not finite") {}
};

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

struct ModelConfig {
  int enc_layers = 2;
  int dec_layers = 2;
  int d_model = 128;
  int heads = 4;
  int ffn_dim = 512;
  int max_positions = 256;
  int vocab_size = 0;
  // The encoder input, decoder input, and decoder output projection all
  // read the one token embedding matrix; not configurable.
  static constexpr bool share_embeddings = true;

  int head_dim() const { return d_model / heads; }
  void validate() const {
    if (d_model % heads != 0)
      throw ShapeMismatch("d_model must be divisible by heads");
    if (vocab_size <= 0) throw ShapeMismatch("vocab_size must be positive");
  }
};

template <typename S>
struct LayerNormP {
  Mat<S> scale;  // d x 1
  Mat<S> shift;  // d x 1
};

template <typename S>
struct AttentionP {
  Mat<S> wq, wk, wv, wo;  // each d x d
};

template <typename S>
struct FfnP {
  Mat<S> w1;  // d x ffn
  Mat<S> b1;  // ffn x 1
  Mat<S> w2;  // ffn x d
  Mat<S> b2;  // d x 1
};

template <typename S>
struct EncLayerP {
  LayerNormP<S> ln1;
  AttentionP<S> att;
  LayerNormP<S> ln2;
  FfnP<S> ffn;
};

template <typename S>
struct DecLayerP {
  LayerNormP<S> ln1;
  AttentionP<S> self_att;
  LayerNormP<S> ln2;
  AttentionP<S> cross_att;
  LayerNormP<S> ln3;
  FfnP<S> ffn;
};

template <typename S>
struct ModelParams {
  ModelConfig cfg;
  Mat<S> tok_embed;  // V x d, shared with the output projection
  Mat<S> pos_embed;  // m x d, learned
  std::vector<EncLayerP<S>> enc;
  std::vector<DecLayerP<S>> dec;
  LayerNormP<S> enc_final_ln;
  LayerNormP<S> dec_final_ln;
};

// Every parameter matrix in its declared (checkpoint) order.
template <typename S, typename F>
void visit_params(ModelParams<S>& p, F&& f) {
  f("tok_embed", p.tok_embed);
  f("pos_embed", p.pos_embed);
  auto ln = [&](const std::string& name, LayerNormP<S>& l) {
    f(name + ".scale", l.scale);
    f(name + ".shift", l.shift);
  };
  auto att = [&](const std::string& name, AttentionP<S>& a) {
    f(name + ".wq", a.wq);
    f(name + ".wk", a.wk);
    f(name + ".wv", a.wv);
    f(name + ".wo", a.wo);
  };
  auto ffn = [&](const std::string& name, FfnP<S>& x) {
    f(name + ".w1", x.w1);
    f(name + ".b1", x.b1);
    f(name + ".w2", x.w2);
    f(name + ".b2", x.b2);
  };
  for (size_t i = 0; i < p.enc.size(); ++i) {
    std::string base = "enc" + std::to_string(i);
    ln(base + ".ln1", p.enc[i].ln1);
    att(base + ".att", p.enc[i].att);
    ln(base + ".ln2", p.enc[i].ln2);
    ffn(base + ".ffn", p.enc[i].ffn);
  }
  ln("enc_final_ln", p.enc_final_ln);
  for (size_t i = 0; i < p.dec.size(); ++i) {
    std::string base = "dec" + std::to_string(i);
    ln(base + ".ln1", p.dec[i].ln1);
    att(base + ".self_att", p.dec[i].self_att);
    ln(base + ".ln2", p.dec[i].ln2);
    att(base + ".cross_att", p.dec[i].cross_att);
    ln(base + ".ln3", p.dec[i].ln3);
    ffn(base + ".ffn", p.dec[i].ffn);
  }
  ln("dec_final_ln", p.dec_final_ln);
}

template <typename S, typename F>
void visit_params(const ModelParams<S>& p, F&& f) {
  visit_params(const_cast<ModelParams<S>&>(p),
               [&](const std::string& name, Mat<S>& m) {
                 f(name, static_cast<const Mat<S>&>(m));
               });
}

namespace detail {

template <typename S>
void shape_params(ModelParams<S>& p, const ModelConfig& cfg) {
  cfg.validate();
  p.cfg = cfg;
  const int d = cfg.d_model;
  p.tok_embed.resize(cfg.vocab_size, d);
  p.pos_embed.resize(cfg.max_positions, d);
  auto ln = [&](LayerNormP<S>& l) {
    l.scale.resize(d, 1);
    l.shift.resize(d, 1);
  };
  auto att = [&](AttentionP<S>& a) {
    a.wq.resize(d, d);
    a.wk.resize(d, d);
    a.wv.resize(d, d);
    a.wo.resize(d, d);
  };
  auto ffn = [&](FfnP<S>& x) {
    x.w1.resize(d, cfg.ffn_dim);
    x.b1.resize(cfg.ffn_dim, 1);
    x.w2.resize(cfg.ffn_dim, d);
    x.b2.resize(d, 1);
  };
  p.enc.resize(cfg.enc_layers);
  for (auto& l : p.enc) {
    ln(l.ln1);
    att(l.att);
    ln(l.ln2);
    ffn(l.ffn);
  }
  ln(p.enc_final_ln);
  p.dec.resize(cfg.dec_layers);
  for (auto& l : p.dec) {
    ln(l.ln1);
    att(l.self_att);
    ln(l.ln2);
    att(l.cross_att);
    ln(l.ln3);
    ffn(l.ffn);
  }
  ln(p.dec_final_ln);
}

}  // namespace detail

// Weights ~ N(0, 0.02) from the seeded generator; layer-norm scales start
// at one and shifts at zero.
template <typename S>
ModelParams<S> init_model(const ModelConfig& cfg, uint64_t seed) {
  ModelParams<S> p;
  detail::shape_params(p, cfg);
  Rng rng(seed);
  visit_params(p, [&](const std::string& name, Mat<S>& m) {
    if (name.find(".scale") != std::string::npos ||
        name.find(".shift") != std::string::npos) {
      bool scale = name.find(".scale") != std::string::npos;
      m.setConstant(scale ? S(1) : S(0));
      return;
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        m(r, c) = S(rng.normal(0.0, 0.02));
  });
  return p;
}

template <typename S>
ModelParams<S> zeros_like(const ModelParams<S>& p) {
  ModelParams<S> z;
  detail::shape_params(z, p.cfg);
  visit_params(z, [](const std::string&, Mat<S>& m) { m.setZero(); });
  return z;
}

template <typename S>
bool all_finite(const ModelParams<S>& p) {
  bool ok = true;
  visit_params(p, [&](const std::string&, const Mat<S>& m) {
    ok = ok && m.allFinite();
  });
  return ok;
}

template <typename S>
size_t param_count(const ModelParams<S>& p) {
  size_t n = 0;
  visit_params(p, [&](const std::string&, const Mat<S>& m) { n += m.size(); });
  return n;
}

// 32-bit <-> 64-bit (gradient checking runs wide, training narrow).
template <typename To, typename From>
ModelParams<To> cast_params(const ModelParams<From>& p) {
  ModelParams<To> out;
  detail::shape_params(out, p.cfg);
  std::vector<const Mat<From>*> src;
  visit_params(p, [&](const std::string&, const Mat<From>& m) {
    src.push_back(&m);
  });
  size_t i = 0;
  visit_params(out, [&](const std::string&, Mat<To>& m) {
    m = src[i++]->template cast<To>();
  });
  return out;
}

}  // namespace declab::nn
