#include "earshot/train/trainer.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

#include "earshot/eval/scoring.hpp"
#include "earshot/nn/loss.hpp"

namespace earshot::train {

using json = nlohmann::json;

void snapshot_params(model::Network<float>& net, std::vector<nn::Tensor<float>>& out) {
  out.clear();
  for (auto* p : net.params()) out.push_back(p->value);
}

void restore_params(model::Network<float>& net, const std::vector<nn::Tensor<float>>& snap) {
  auto params = net.params();
  if (params.size() != snap.size()) throw std::runtime_error("restore_params: size mismatch");
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

namespace {

void dump_diagnostics(const std::string& path, model::Network<float>& net, int step, double loss,
                      const std::vector<int64_t>& batch_ids) {
  json j;
  j["step"] = step;
  j["loss"] = loss;
  j["batch_clip_ids"] = batch_ids;
  json pstats = json::array();
  for (auto* p : net.params()) {
    double mn = 0, mx = 0, sum = 0;
    bool finite = true;
    for (int64_t i = 0; i < p->value.numel(); ++i) {
      const double v = p->value[i];
      finite &= std::isfinite(v);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      sum += v * v;
    }
    pstats.push_back({{"name", p->name},
                      {"min", mn},
                      {"max", mx},
                      {"l2", std::sqrt(sum)},
                      {"finite", finite}});
  }
  j["params"] = pstats;
  std::ofstream f(path);
  if (f) f << j.dump(2);
}

}  // namespace

TrainResult train_model(model::Network<float>& net, nn::Adam<float>& opt, ClipDataset& train_ds,
                        const ClipDataset* eval_ds, const TrainConfig& cfg) {
  if (train_ds.size() == 0) throw ConfigError("train_model: empty dataset");
  const bool need_visual = model::variant_has_visual(net.config().variant);
  const bool need_audio = model::variant_has_audio(net.config().variant);
  opt.set_lr(cfg.lr);

  TrainResult res;
  std::ofstream curve;
  if (!cfg.curve_csv.empty()) {
    curve.open(cfg.curve_csv);
    curve << "step,loss\n";
  }

  std::vector<int64_t> order(static_cast<size_t>(train_ds.size()));
  for (int64_t i = 0; i < train_ds.size(); ++i) order[static_cast<size_t>(i)] = i;
  size_t cursor = order.size();  // trigger shuffle on first step
  uint64_t epoch = 0;

  const int start_step = static_cast<int>(opt.step_count());
  for (int s = 0; s < cfg.steps; ++s) {
    const int step = start_step + s;
    std::vector<ClipSample> clips;
    std::vector<int64_t> ids;
    while (static_cast<int>(clips.size()) < cfg.batch_size) {
      if (cursor >= order.size()) {
        Rng rng(derive_seed(cfg.seed, 0x7368756666ull, epoch++));
        rng.shuffle(order);
        cursor = 0;
      }
      ids.push_back(order[cursor]);
      clips.push_back(train_ds.get(order[cursor]));
      ++cursor;
    }
    const Batch batch = make_batch(clips, need_visual, need_audio);

    nn::Tensor<float> logits =
        net.forward(need_visual ? &batch.visual : nullptr, need_audio ? &batch.audio : nullptr);
    nn::LossResult<float> loss =
        cfg.asl_modulated_loss
            ? nn::masked_attended_ce(logits, batch.labels, batch.speaker_mask)
            : nn::pixelwise_ce(logits, batch.labels);

    if (!std::isfinite(loss.loss)) {
      dump_diagnostics(cfg.diagnostic_path, net, step, loss.loss, ids);
      throw NumericError("non-finite loss at step " + std::to_string(step) +
                         "; diagnostics in " + cfg.diagnostic_path);
    }
    if (s == 0) res.first_loss = loss.loss;
    res.last_loss = loss.loss;
    if (cfg.log_every > 0 && (s % cfg.log_every == 0 || s + 1 == cfg.steps)) {
      res.losses.emplace_back(step, loss.loss);
    }
    if (curve.is_open()) curve << step << ',' << loss.loss << '\n';

    opt.zero_grad();
    net.backward(loss.dlogits);
    opt.step();

    const bool eval_now = eval_ds && ((cfg.eval_every > 0 && (s + 1) % cfg.eval_every == 0) ||
                                      s + 1 == cfg.steps);
    if (eval_now) {
      const auto out = eval::evaluate_model(net, *eval_ds, cfg.batch_size);
      if (out.map > res.best_map) {
        res.best_map = out.map;
        res.best_step = step + 1;
        snapshot_params(net, res.best_params);
      }
    }
  }
  return res;
}

}  // namespace earshot::train
