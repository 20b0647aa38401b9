#pragma once

#include <algorithm>
#include <vector>

#include "declab/nn/transformer.hpp"

namespace declab::nn {

struct BeamConfig {
  int k = 5;
  int max_decode_len = 256;
};

// Single-position decoder with cached self-attention keys/values and
// precomputed cross-attention projections of the encoder memory. Feeding
// tokens one at a time reproduces forward()'s logits exactly.
template <typename S>
class IncrementalDecoder {
 public:
  struct State {
    std::vector<Mat<S>> k_self, v_self;  // per layer, t x d
    int t = 0;
  };

  IncrementalDecoder(const ModelParams<S>& p, const std::vector<int>& src)
      : p_(&p) {
    memory_ = detail::run_encoder(p, src, static_cast<ForwardCache<S>*>(nullptr));
    k_cross_.reserve(p.dec.size());
    v_cross_.reserve(p.dec.size());
    for (const DecLayerP<S>& l : p.dec) {
      k_cross_.push_back(memory_ * l.cross_att.wk);
      v_cross_.push_back(memory_ * l.cross_att.wv);
    }
  }

  State start() const {
    State st;
    st.k_self.resize(p_->dec.size());
    st.v_self.resize(p_->dec.size());
    const int d = p_->cfg.d_model;
    for (size_t l = 0; l < p_->dec.size(); ++l) {
      st.k_self[l].resize(0, d);
      st.v_self[l].resize(0, d);
    }
    return st;
  }

  // Feeds one token, returns log-probabilities over the vocabulary for the
  // next position.
  Mat<S> step(State& st, int token) const {
    const ModelParams<S>& p = *p_;
    const int d = p.cfg.d_model;
    const int heads = p.cfg.heads;
    const int dk = p.cfg.head_dim();
    const S scale = S(1) / std::sqrt(S(dk));
    if (st.t >= p.cfg.max_positions)
      throw SequenceTooLong("decoded sequence exceeds " +
                            std::to_string(p.cfg.max_positions) +
                            " positions");
    if (token < 0 || token >= p.cfg.vocab_size)
      throw ShapeMismatch("token id out of vocabulary range");

    detail::LnCache<S>* no_ln = nullptr;
    detail::FfnCache<S>* no_ffn = nullptr;
    Mat<S> x = p.tok_embed.row(token) + p.pos_embed.row(st.t);
    for (size_t l = 0; l < p.dec.size(); ++l) {
      const DecLayerP<S>& lp = p.dec[l];
      Mat<S> n1 = detail::layer_norm(lp.ln1, x, no_ln);
      Mat<S>& ks = st.k_self[l];
      Mat<S>& vs = st.v_self[l];
      ks.conservativeResize(st.t + 1, d);
      vs.conservativeResize(st.t + 1, d);
      ks.row(st.t) = n1 * lp.self_att.wk;
      vs.row(st.t) = n1 * lp.self_att.wv;
      Mat<S> q = n1 * lp.self_att.wq;
      x += one_query_attention(q, ks, vs, heads, dk, scale) *
           lp.self_att.wo;

      Mat<S> n2 = detail::layer_norm(lp.ln2, x, no_ln);
      Mat<S> q2 = n2 * lp.cross_att.wq;
      x += one_query_attention(q2, k_cross_[l], v_cross_[l], heads, dk,
                               scale) *
           lp.cross_att.wo;

      Mat<S> n3 = detail::layer_norm(lp.ln3, x, no_ln);
      x += detail::ffn(lp.ffn, n3, no_ffn);
    }
    Mat<S> out = detail::layer_norm(p.dec_final_ln, x, no_ln);
    Mat<S> logits = out * p.tok_embed.transpose();  // 1 x V
    S mx = logits.row(0).maxCoeff();
    S lse = mx + std::log((logits.row(0).array() - mx).exp().sum());
    Mat<S> lp_out = logits.transpose();
    lp_out.array() -= lse;
    st.t += 1;
    return lp_out;  // V x 1
  }

  const Mat<S>& memory() const { return memory_; }

 private:
  static Mat<S> one_query_attention(const Mat<S>& q, const Mat<S>& k,
                                    const Mat<S>& v, int heads, int dk,
                                    S scale) {
    Mat<S> ctx(1, heads * dk);
    for (int h = 0; h < heads; ++h) {
      auto kh = k.middleCols(h * dk, dk);
      auto vh = v.middleCols(h * dk, dk);
      Mat<S> s = q.middleCols(h * dk, dk) * kh.transpose() * scale;  // 1 x t
      S mx = s.row(0).maxCoeff();
      Eigen::Array<S, 1, Eigen::Dynamic> e = (s.row(0).array() - mx).exp();
      Mat<S> a = (e / e.sum()).matrix();
      ctx.middleCols(h * dk, dk) = a * vh;
    }
    return ctx;
  }

  const ModelParams<S>* p_;
  Mat<S> memory_;
  std::vector<Mat<S>> k_cross_, v_cross_;
};

// Beam search over any decoder exposing start()/step(). Hypotheses carry
// summed token log-probs; ties prefer the lower token id. A hypothesis
// finishes at EOS; the search stops once k have finished (or the length
// cap is reached) and returns the best finished one, falling back to the
// best partial when nothing finished.
template <typename S, typename Dec>
std::vector<int> beam_decode(const Dec& dec, const BeamConfig& bcfg,
                             int bos_id, int eos_id) {
  struct Hyp {
    typename Dec::State state;
    std::vector<int> tokens;
    double score = 0.0;
    Mat<S> lp;  // next-token log-probs, V x 1
  };
  struct Done {
    std::vector<int> tokens;
    double score;
  };

  std::vector<Hyp> live(1);
  live[0].state = dec.start();
  live[0].lp = dec.step(live[0].state, bos_id);
  std::vector<Done> done;

  for (int t = 0;
       t < bcfg.max_decode_len && !live.empty() &&
       static_cast<int>(done.size()) < bcfg.k;
       ++t) {
    struct Cand {
      double score;
      int token;
      size_t beam;
    };
    std::vector<Cand> cands;
    for (size_t b = 0; b < live.size(); ++b) {
      const Eigen::Index v_count = live[b].lp.rows();
      std::vector<int> order(static_cast<size_t>(v_count));
      for (Eigen::Index i = 0; i < v_count; ++i)
        order[static_cast<size_t>(i)] = static_cast<int>(i);
      size_t keep = std::min<size_t>(order.size(),
                                     static_cast<size_t>(bcfg.k));
      std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                        [&](int x, int y) {
                          double lx = double(live[b].lp(x, 0));
                          double ly = double(live[b].lp(y, 0));
                          if (lx != ly) return lx > ly;
                          return x < y;
                        });
      for (size_t i = 0; i < keep; ++i)
        cands.push_back(
            {live[b].score + double(live[b].lp(order[i], 0)), order[i], b});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.token != b.token) return a.token < b.token;
      return a.beam < b.beam;
    });
    if (cands.size() > static_cast<size_t>(bcfg.k))
      cands.resize(static_cast<size_t>(bcfg.k));

    std::vector<Hyp> next;
    for (const Cand& c : cands) {
      if (c.token == eos_id) {
        done.push_back({live[c.beam].tokens, c.score});
        continue;
      }
      Hyp h;
      h.state = live[c.beam].state;  // fork the cache
      h.tokens = live[c.beam].tokens;
      h.tokens.push_back(c.token);
      h.score = c.score;
      h.lp = dec.step(h.state, c.token);
      next.push_back(std::move(h));
    }
    live = std::move(next);
  }

  if (!done.empty()) {
    const Done* best = &done[0];
    for (const Done& d : done)
      if (d.score > best->score) best = &d;
    return best->tokens;
  }
  if (live.empty()) return {};
  const Hyp* best = &live[0];
  for (const Hyp& h : live)
    if (h.score > best->score) best = &h;
  return best->tokens;
}

// The model-facing entry point: decode a source token sequence to the best
// target hypothesis (content tokens only, no BOS/EOS).
template <typename S>
std::vector<int> beam_search(const ModelParams<S>& p,
                             const std::vector<int>& src,
                             const BeamConfig& bcfg, int bos_id, int eos_id) {
  IncrementalDecoder<S> dec(p, src);
  return beam_decode<S>(dec, bcfg, bos_id, eos_id);
}

}  // namespace declab::nn
