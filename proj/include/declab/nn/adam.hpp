#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "declab/nn/transformer.hpp"

namespace declab::nn {

struct TrainConfig {
  int batch_size = 8;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-9;
  int warmup_steps = 400;
  int max_steps = 1000;
  uint64_t seed = 0;
  int pad_id = 0;
  int bos_id = 1;
  int eos_id = 2;
  // The reference model trains without dropout or label smoothing; both
  // are fixed at zero by design, not options.
  static constexpr double dropout = 0.0;
  static constexpr double label_smoothing = 0.0;
};

template <typename S>
struct AdamState {
  int step = 0;
  ModelParams<S> m;  // first-moment estimate
  ModelParams<S> v;  // second-moment estimate
};

template <typename S>
AdamState<S> make_adam_state(const ModelParams<S>& p) {
  return AdamState<S>{0, zeros_like(p), zeros_like(p)};
}

// One (source tokens, target tokens) pair; BOS/EOS framing is applied here.
using TrainPair = std::pair<std::vector<int>, std::vector<int>>;

// Teacher-forced batch loss and one Adam update with bias correction and
// linear warmup. Returns the pre-update mean loss per target token.
template <typename S>
S train_step(ModelParams<S>& p, const std::vector<TrainPair>& batch,
             AdamState<S>& adam, const TrainConfig& tcfg) {
  ModelParams<S> grads = zeros_like(p);

  int total_tokens = 0;
  for (const TrainPair& pair : batch)
    total_tokens += static_cast<int>(pair.second.size()) + 1;  // + EOS
  if (total_tokens == 0) return S(0);

  S loss_sum = S(0);
  const S scale = S(1) / S(total_tokens);
  for (const TrainPair& pair : batch) {
    std::vector<int> tgt_in;
    tgt_in.reserve(pair.second.size() + 1);
    tgt_in.push_back(tcfg.bos_id);
    tgt_in.insert(tgt_in.end(), pair.second.begin(), pair.second.end());
    std::vector<int> gold = pair.second;
    gold.push_back(tcfg.eos_id);

    ForwardCache<S> cache;
    Mat<S> logits = forward(p, pair.first, tgt_in, &cache);
    CeLoss<S> ce = cross_entropy(logits, gold, tcfg.pad_id);
    loss_sum += ce.sum;
    Mat<S> dlogits = cross_entropy_grad(logits, gold, tcfg.pad_id, scale);
    backward(p, cache, dlogits, grads);
  }
  S loss = loss_sum / S(total_tokens);
  if (!std::isfinite(double(loss))) throw NonFiniteLoss{};

  adam.step += 1;
  const double t = adam.step;
  const double warm =
      tcfg.warmup_steps > 0 ? std::min(1.0, t / tcfg.warmup_steps) : 1.0;
  const double lr = tcfg.learning_rate * warm;
  const double bc1 = 1.0 - std::pow(tcfg.beta1, t);
  const double bc2 = 1.0 - std::pow(tcfg.beta2, t);

  std::vector<Mat<S>*> pm, gm, mm, vm;
  visit_params(p, [&](const std::string&, Mat<S>& x) { pm.push_back(&x); });
  visit_params(grads,
               [&](const std::string&, Mat<S>& x) { gm.push_back(&x); });
  visit_params(adam.m,
               [&](const std::string&, Mat<S>& x) { mm.push_back(&x); });
  visit_params(adam.v,
               [&](const std::string&, Mat<S>& x) { vm.push_back(&x); });
  for (size_t i = 0; i < pm.size(); ++i) {
    Mat<S>& w = *pm[i];
    const Mat<S>& g = *gm[i];
    Mat<S>& m1 = *mm[i];
    Mat<S>& m2 = *vm[i];
    m1 = S(tcfg.beta1) * m1 + S(1 - tcfg.beta1) * g;
    m2.array() = S(tcfg.beta2) * m2.array() +
                 S(1 - tcfg.beta2) * g.array().square();
    w.array() -= S(lr) * (m1.array() / S(bc1)) /
                 ((m2.array() / S(bc2)).sqrt() + S(tcfg.adam_eps));
  }
  if (!all_finite(p)) throw NonFiniteLoss{};
  return loss;
}

}  // namespace declab::nn
