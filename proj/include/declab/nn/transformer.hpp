#pragma once

#include <cmath>
#include <limits>

#include "declab/nn/model.hpp"

namespace declab::nn {

// Row-wise activations: sequences are n x d matrices, one position per row.

namespace detail {

constexpr double kLnEps = 1e-5;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

template <typename S>
S gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x / S(std::sqrt(2.0))));
}

template <typename S>
S dgelu(S x) {
  S cdf = S(0.5) * (S(1) + std::erf(x / S(std::sqrt(2.0))));
  S pdf = S(std::exp(-0.5 * double(x) * double(x)) * kInvSqrt2Pi);
  return cdf + x * pdf;
}

template <typename S>
struct LnCache {
  Mat<S> xhat;  // n x d
  Mat<S> inv;   // n x 1, 1/sqrt(var + eps)
};

template <typename S>
Mat<S> layer_norm(const LayerNormP<S>& p, const Mat<S>& x, LnCache<S>* c) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Mat<S> xhat(n, d), out(n, d), inv(n, 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    S mu = x.row(r).mean();
    S var = (x.row(r).array() - mu).square().mean();
    S iv = S(1) / std::sqrt(var + S(kLnEps));
    inv(r, 0) = iv;
    xhat.row(r) = ((x.row(r).array() - mu) * iv).matrix();
    out.row(r) = xhat.row(r).cwiseProduct(p.scale.transpose()) +
                 p.shift.transpose();
  }
  if (c) {
    c->xhat = xhat;
    c->inv = inv;
  }
  return out;
}

template <typename S>
Mat<S> layer_norm_backward(const LayerNormP<S>& p, const LnCache<S>& c,
                           const Mat<S>& dy, LayerNormP<S>& grad) {
  const Eigen::Index n = dy.rows(), d = dy.cols();
  grad.scale += dy.cwiseProduct(c.xhat).colwise().sum().transpose();
  grad.shift += dy.colwise().sum().transpose();
  Mat<S> dx(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    Mat<S> dxhat = dy.row(r).cwiseProduct(p.scale.transpose());
    S m1 = dxhat.mean();
    S m2 = dxhat.cwiseProduct(c.xhat.row(r)).mean();
    dx.row(r) =
        ((dxhat.array() - m1 - c.xhat.row(r).array() * m2) * c.inv(r, 0))
            .matrix();
  }
  return dx;
}

template <typename S>
struct AttCache {
  Mat<S> q_in, kv_in;     // layer-norm outputs (or encoder memory)
  Mat<S> q, k, v, ctx;    // n x d
  std::vector<Mat<S>> a;  // per head, n_q x n_k softmax rows
};

// softmax(Q K^T / sqrt(d_k)) V per head, heads concatenated, then W_o.
template <typename S>
Mat<S> attention(const AttentionP<S>& p, const Mat<S>& q_in,
                 const Mat<S>& kv_in, bool causal, int heads, AttCache<S>* c) {
  const Eigen::Index d = q_in.cols();
  const Eigen::Index dk = d / heads;
  const S scale = S(1) / std::sqrt(S(dk));
  Mat<S> q = q_in * p.wq;
  Mat<S> k = kv_in * p.wk;
  Mat<S> v = kv_in * p.wv;
  Mat<S> ctx(q.rows(), d);
  std::vector<Mat<S>> heads_a;
  heads_a.reserve(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    auto qh = q.middleCols(h * dk, dk);
    auto kh = k.middleCols(h * dk, dk);
    auto vh = v.middleCols(h * dk, dk);
    Mat<S> s = qh * kh.transpose() * scale;
    if (causal) {
      for (Eigen::Index r = 0; r < s.rows(); ++r)
        for (Eigen::Index col = r + 1; col < s.cols(); ++col)
          s(r, col) = -std::numeric_limits<S>::infinity();
    }
    Mat<S> a(s.rows(), s.cols());
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      S mx = s.row(r).maxCoeff();
      Eigen::Array<S, 1, Eigen::Dynamic> e = (s.row(r).array() - mx).exp();
      a.row(r) = (e / e.sum()).matrix();
    }
    ctx.middleCols(h * dk, dk) = a * vh;
    heads_a.push_back(std::move(a));
  }
  Mat<S> out = ctx * p.wo;
  if (c) {
    c->q_in = q_in;
    c->kv_in = kv_in;
    c->q = std::move(q);
    c->k = std::move(k);
    c->v = std::move(v);
    c->ctx = std::move(ctx);
    c->a = std::move(heads_a);
  }
  return out;
}

// Returns the gradient w.r.t. q_in; the gradient w.r.t. kv_in is
// accumulated into dkv_in (they are the same tensor for self-attention).
template <typename S>
Mat<S> attention_backward(const AttentionP<S>& p, const AttCache<S>& c,
                          const Mat<S>& dout, int heads, AttentionP<S>& grad,
                          Mat<S>& dkv_in) {
  const Eigen::Index d = c.q.cols();
  const Eigen::Index dk = d / heads;
  const S scale = S(1) / std::sqrt(S(dk));
  grad.wo += c.ctx.transpose() * dout;
  Mat<S> dctx = dout * p.wo.transpose();
  Mat<S> dq(c.q.rows(), d), dkm(c.k.rows(), d), dvm(c.v.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const Mat<S>& a = c.a[static_cast<size_t>(h)];
    auto kh = c.k.middleCols(h * dk, dk);
    auto vh = c.v.middleCols(h * dk, dk);
    auto qh = c.q.middleCols(h * dk, dk);
    Mat<S> dctx_h = dctx.middleCols(h * dk, dk);
    Mat<S> da = dctx_h * vh.transpose();
    dvm.middleCols(h * dk, dk) = a.transpose() * dctx_h;
    // softmax backward, row-wise: ds = a .* (da - rowsum(da .* a))
    Mat<S> ds(a.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      S dot = da.row(r).cwiseProduct(a.row(r)).sum();
      ds.row(r) =
          a.row(r).cwiseProduct(((da.row(r).array() - dot)).matrix());
    }
    dq.middleCols(h * dk, dk) = ds * kh * scale;
    dkm.middleCols(h * dk, dk) = ds.transpose() * qh * scale;
  }
  grad.wq += c.q_in.transpose() * dq;
  grad.wk += c.kv_in.transpose() * dkm;
  grad.wv += c.kv_in.transpose() * dvm;
  dkv_in += dkm * p.wk.transpose() + dvm * p.wv.transpose();
  return dq * p.wq.transpose();
}

template <typename S>
struct FfnCache {
  Mat<S> x, u, act;  // input, pre-activation, activation
};

template <typename S>
Mat<S> ffn(const FfnP<S>& p, const Mat<S>& x, FfnCache<S>* c) {
  Mat<S> u = x * p.w1;
  u.rowwise() += p.b1.col(0).transpose();
  Mat<S> act = u.unaryExpr([](S v) { return gelu(v); });
  Mat<S> out = act * p.w2;
  out.rowwise() += p.b2.col(0).transpose();
  if (c) {
    c->x = x;
    c->u = std::move(u);
    c->act = std::move(act);
  }
  return out;
}

template <typename S>
Mat<S> ffn_backward(const FfnP<S>& p, const FfnCache<S>& c, const Mat<S>& dy,
                    FfnP<S>& grad) {
  grad.w2 += c.act.transpose() * dy;
  grad.b2 += dy.colwise().sum().transpose();
  Mat<S> dact = dy * p.w2.transpose();
  Mat<S> du = dact.cwiseProduct(c.u.unaryExpr([](S v) { return dgelu(v); }));
  grad.w1 += c.x.transpose() * du;
  grad.b1 += du.colwise().sum().transpose();
  return du * p.w1.transpose();
}

template <typename S>
struct EncLayerCache {
  LnCache<S> ln1;
  AttCache<S> att;
  LnCache<S> ln2;
  FfnCache<S> ffn;
};

template <typename S>
struct DecLayerCache {
  LnCache<S> ln1;
  AttCache<S> self_att;
  LnCache<S> ln2;
  AttCache<S> cross_att;
  LnCache<S> ln3;
  FfnCache<S> ffn;
};

}  // namespace detail

template <typename S>
struct ForwardCache {
  std::vector<int> src, tgt;
  std::vector<detail::EncLayerCache<S>> enc;
  detail::LnCache<S> enc_final;
  Mat<S> memory;  // encoder output after the final layer norm
  std::vector<detail::DecLayerCache<S>> dec;
  detail::LnCache<S> dec_final;
  Mat<S> dec_out;  // decoder output after the final layer norm
};

namespace detail {

template <typename S>
Mat<S> embed(const ModelParams<S>& p, const std::vector<int>& ids,
             const char* which) {
  if (static_cast<int>(ids.size()) > p.cfg.max_positions)
    throw SequenceTooLong(std::string(which) + " sequence of " +
                          std::to_string(ids.size()) + " exceeds " +
                          std::to_string(p.cfg.max_positions) + " positions");
  Mat<S> x(static_cast<Eigen::Index>(ids.size()), p.cfg.d_model);
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= p.cfg.vocab_size)
      throw ShapeMismatch("token id out of vocabulary range");
    x.row(static_cast<Eigen::Index>(i)) =
        p.tok_embed.row(ids[i]) +
        p.pos_embed.row(static_cast<Eigen::Index>(i));
  }
  return x;
}

template <typename S>
Mat<S> run_encoder(const ModelParams<S>& p, const std::vector<int>& src,
                   ForwardCache<S>* cache) {
  Mat<S> x = embed(p, src, "source");
  if (cache) cache->enc.resize(p.enc.size());
  for (size_t l = 0; l < p.enc.size(); ++l) {
    const EncLayerP<S>& lp = p.enc[l];
    EncLayerCache<S>* lc = cache ? &cache->enc[l] : nullptr;
    Mat<S> n1 = layer_norm(lp.ln1, x, lc ? &lc->ln1 : nullptr);
    x += attention(lp.att, n1, n1, false, p.cfg.heads,
                   lc ? &lc->att : nullptr);
    Mat<S> n2 = layer_norm(lp.ln2, x, lc ? &lc->ln2 : nullptr);
    x += ffn(lp.ffn, n2, lc ? &lc->ffn : nullptr);
  }
  Mat<S> memory =
      layer_norm(p.enc_final_ln, x, cache ? &cache->enc_final : nullptr);
  if (cache) cache->memory = memory;
  return memory;
}

}  // namespace detail

// Next-token logits (one row per target prefix position). The decoder
// self-attention is causally masked; the output projection is the
// transposed token embedding.
template <typename S>
Mat<S> forward(const ModelParams<S>& p, const std::vector<int>& src,
               const std::vector<int>& tgt_prefix,
               ForwardCache<S>* cache = nullptr) {
  if (cache) {
    cache->src = src;
    cache->tgt = tgt_prefix;
  }
  Mat<S> memory = detail::run_encoder(p, src, cache);
  Mat<S> x = detail::embed(p, tgt_prefix, "target");
  if (cache) cache->dec.resize(p.dec.size());
  for (size_t l = 0; l < p.dec.size(); ++l) {
    const DecLayerP<S>& lp = p.dec[l];
    detail::DecLayerCache<S>* lc = cache ? &cache->dec[l] : nullptr;
    Mat<S> n1 = detail::layer_norm(lp.ln1, x, lc ? &lc->ln1 : nullptr);
    x += detail::attention(lp.self_att, n1, n1, true, p.cfg.heads,
                           lc ? &lc->self_att : nullptr);
    Mat<S> n2 = detail::layer_norm(lp.ln2, x, lc ? &lc->ln2 : nullptr);
    x += detail::attention(lp.cross_att, n2, memory, false, p.cfg.heads,
                           lc ? &lc->cross_att : nullptr);
    Mat<S> n3 = detail::layer_norm(lp.ln3, x, lc ? &lc->ln3 : nullptr);
    x += detail::ffn(lp.ffn, n3, lc ? &lc->ffn : nullptr);
  }
  Mat<S> out = detail::layer_norm(p.dec_final_ln, x,
                                  cache ? &cache->dec_final : nullptr);
  if (cache) cache->dec_out = out;
  return out * p.tok_embed.transpose();
}

template <typename S>
struct CeLoss {
  S sum = S(0);   // summed negative log-likelihood
  int count = 0;  // scored (non-PAD) positions
  S mean() const { return count > 0 ? sum / S(count) : S(0); }
};

// Teacher-forced next-token loss; PAD positions in gold are skipped.
template <typename S>
CeLoss<S> cross_entropy(const Mat<S>& logits, const std::vector<int>& gold,
                        int pad_id) {
  if (logits.rows() != static_cast<Eigen::Index>(gold.size()))
    throw ShapeMismatch("logits rows " + std::to_string(logits.rows()) +
                        " vs gold length " + std::to_string(gold.size()));
  CeLoss<S> loss;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    int g = gold[static_cast<size_t>(r)];
    if (g == pad_id) continue;
    if (g < 0 || g >= logits.cols())
      throw ShapeMismatch("gold token id out of range");
    S mx = logits.row(r).maxCoeff();
    S lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    loss.sum += lse - logits(r, g);
    loss.count += 1;
  }
  return loss;
}

// dLoss/dLogits for `scale * summed` cross entropy (pass scale = 1/tokens
// for a mean over a batch). PAD rows stay zero.
template <typename S>
Mat<S> cross_entropy_grad(const Mat<S>& logits, const std::vector<int>& gold,
                          int pad_id, S scale) {
  if (logits.rows() != static_cast<Eigen::Index>(gold.size()))
    throw ShapeMismatch("logits rows vs gold length");
  Mat<S> d = Mat<S>::Zero(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    int g = gold[static_cast<size_t>(r)];
    if (g == pad_id) continue;
    S mx = logits.row(r).maxCoeff();
    Eigen::Array<S, 1, Eigen::Dynamic> e = (logits.row(r).array() - mx).exp();
    d.row(r) = ((e / e.sum()) * scale).matrix();
    d(r, g) -= scale;
  }
  return d;
}

// Exact reverse-mode gradients of the forward pass, accumulated into
// `grads` (zeros_like the params to start fresh).
template <typename S>
void backward(const ModelParams<S>& p, const ForwardCache<S>& cache,
              const Mat<S>& dlogits, ModelParams<S>& grads) {
  using detail::attention_backward;
  using detail::ffn_backward;
  using detail::layer_norm_backward;

  // logits = dec_out * tok_embed^T
  grads.tok_embed += dlogits.transpose() * cache.dec_out;
  Mat<S> dx = dlogits * p.tok_embed;

  dx = layer_norm_backward(p.dec_final_ln, cache.dec_final, dx,
                           grads.dec_final_ln);
  Mat<S> dmemory = Mat<S>::Zero(cache.memory.rows(), cache.memory.cols());
  for (size_t l = p.dec.size(); l-- > 0;) {
    const DecLayerP<S>& lp = p.dec[l];
    const detail::DecLayerCache<S>& lc = cache.dec[l];
    DecLayerP<S>& lg = grads.dec[l];
    Mat<S> dn3 = ffn_backward(lp.ffn, lc.ffn, dx, lg.ffn);
    dx += layer_norm_backward(lp.ln3, lc.ln3, dn3, lg.ln3);
    Mat<S> dn2 = attention_backward(lp.cross_att, lc.cross_att, dx,
                                    p.cfg.heads, lg.cross_att, dmemory);
    dx += layer_norm_backward(lp.ln2, lc.ln2, dn2, lg.ln2);
    Mat<S> dself = Mat<S>::Zero(dx.rows(), dx.cols());
    Mat<S> dn1 = attention_backward(lp.self_att, lc.self_att, dx, p.cfg.heads,
                                    lg.self_att, dself);
    dn1 += dself;  // query and key/value inputs are the same tensor
    dx += layer_norm_backward(lp.ln1, lc.ln1, dn1, lg.ln1);
  }
  for (size_t i = 0; i < cache.tgt.size(); ++i) {
    grads.tok_embed.row(cache.tgt[i]) += dx.row(static_cast<Eigen::Index>(i));
    grads.pos_embed.row(static_cast<Eigen::Index>(i)) +=
        dx.row(static_cast<Eigen::Index>(i));
  }

  Mat<S> de = layer_norm_backward(p.enc_final_ln, cache.enc_final, dmemory,
                                  grads.enc_final_ln);
  for (size_t l = p.enc.size(); l-- > 0;) {
    const EncLayerP<S>& lp = p.enc[l];
    const detail::EncLayerCache<S>& lc = cache.enc[l];
    EncLayerP<S>& lg = grads.enc[l];
    Mat<S> dn2 = ffn_backward(lp.ffn, lc.ffn, de, lg.ffn);
    de += layer_norm_backward(lp.ln2, lc.ln2, dn2, lg.ln2);
    Mat<S> dself = Mat<S>::Zero(de.rows(), de.cols());
    Mat<S> dn1 =
        attention_backward(lp.att, lc.att, de, p.cfg.heads, lg.att, dself);
    dn1 += dself;
    de += layer_norm_backward(lp.ln1, lc.ln1, dn1, lg.ln1);
  }
  for (size_t i = 0; i < cache.src.size(); ++i) {
    grads.tok_embed.row(cache.src[i]) += de.row(static_cast<Eigen::Index>(i));
    grads.pos_embed.row(static_cast<Eigen::Index>(i)) +=
        de.row(static_cast<Eigen::Index>(i));
  }
}

}  // namespace declab::nn
