// earshot — synthetic multi-group conversation scenes, a listening-target
// heatmap network, and its evaluation harness.
//
// Subcommands:
//   gen-data   write a dataset (scenes + 6-channel audio + annotations)
//   train      train a model variant on a dataset
//   eval       score a checkpoint plus heuristic baselines, emit metrics
//   selftest   print the shape contract table for a profile
//
// Exit codes: 0 ok, 2 config error, 3 hash mismatch, 4 numeric failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "earshot/cli/run_config.hpp"
#include "earshot/core/threading.hpp"
#include "earshot/eval/overlay.hpp"
#include "earshot/eval/scoring.hpp"
#include "earshot/model/checkpoint.hpp"
#include "earshot/nn/loss.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace earshot;

namespace {

struct CommonArgs {
  std::string config_path;
  int workers = 0;
  bool force = false;
  bool deterministic = false;
  int64_t seed = -1;
};

cli::RunConfig load_config(const CommonArgs& args) {
  cli::RunConfig cfg = cli::RunConfig::load(args.config_path);
  if (args.seed >= 0) {
    cfg.dataset.seed = static_cast<uint64_t>(args.seed);
    cfg.train.opts.seed = static_cast<uint64_t>(args.seed);
    cfg.model_seed = static_cast<uint64_t>(args.seed);
  }
  if (args.deterministic) cfg.train.opts.deterministic = true;
  return cfg;
}

int cmd_gen_data(const CommonArgs& args) {
  cli::RunConfig cfg = load_config(args);
  if (cfg.dataset.out_dir.empty()) throw ConfigError("dataset.out_dir is required");
  const data::Manifest man = data::generate_dataset(cfg.dataset, args.force, num_workers());
  std::cout << "dataset " << cfg.dataset.out_dir << "\n"
            << "  scenes " << man.scenes.size() << ", dataset_hash " << man.dataset_hash << "\n"
            << "  mean_speakers_per_frame " << man.aggregate.mean_speakers_per_frame << "\n"
            << "  mean_visible_heads " << man.aggregate.mean_visible_heads << "\n"
            << "  frames_with_target_frac " << man.aggregate.frames_with_target_frac << "\n"
            << "  frames_out_of_group_frac " << man.aggregate.frames_out_of_group_frac
            << std::endl;
  return 0;
}

int cmd_train(const CommonArgs& args) {
  cli::RunConfig cfg = load_config(args);
  if (cfg.train.dataset_dir.empty()) throw ConfigError("train.dataset_dir is required");

  train::ClipDataset ds(cfg.train.dataset_dir, cfg.features);
  std::unique_ptr<train::ClipDataset> eval_ds;
  if (!cfg.train.eval_dataset_dir.empty()) {
    eval_ds = std::make_unique<train::ClipDataset>(cfg.train.eval_dataset_dir, cfg.features);
    data::assert_disjoint(ds.manifest(), eval_ds->manifest());
  }
  cfg.model.audio_in_channels = cfg.features.audio_planes(ds.manifest().audio_channels);

  model::Network<float> net(cfg.model);
  net.init(cfg.model_seed);
  nn::Adam<float> opt(cfg.train.opts.lr);
  opt.attach(net.params());

  model::CheckpointMeta meta;
  meta.profile = model::to_string(cfg.model.profile);
  meta.variant = model::to_string(cfg.model.variant);
  meta.audio_in_channels = cfg.model.audio_in_channels;
  meta.config_hash = cfg.compat_hash();
  meta.dataset_hash = ds.manifest().dataset_hash;
  meta.pool_lo = ds.manifest().pool_lo;
  meta.pool_hi = ds.manifest().pool_hi;

  if (!cfg.train.resume.empty()) {
    const auto prev = model::load_checkpoint(cfg.train.resume, net, &opt, cfg.compat_hash(),
                                             args.force);
    if (prev.dataset_hash != meta.dataset_hash && !args.force) {
      throw HashMismatchError("resume checkpoint was trained on dataset " + prev.dataset_hash +
                              ", current is " + meta.dataset_hash + " (use --force)");
    }
    std::cout << "resumed from " << cfg.train.resume << " at step " << opt.step_count()
              << std::endl;
  }

  train::TrainConfig topts = cfg.train.opts;
  if (topts.steps <= 0) {
    const int epochs = std::max(1, cfg.train.epochs);
    const int64_t per_epoch =
        (ds.size() + topts.batch_size - 1) / std::max(1, topts.batch_size);
    topts.steps = static_cast<int>(per_epoch * epochs);
  }
  const auto result = train::train_model(net, opt, ds, eval_ds.get(), topts);

  meta.step = opt.step_count();
  if (result.best_map >= 0 && !result.best_params.empty()) {
    // Keep the best-mAP weights in the artifact; optimizer state stays at
    // the final step for resume.
    train::restore_params(net, result.best_params);
  }
  model::save_checkpoint(cfg.train.checkpoint_out, net, &opt, meta);
  std::cout << "trained " << model::to_string(cfg.model.variant) << ": steps " << topts.steps
            << ", loss " << result.first_loss << " -> " << result.last_loss;
  if (result.best_map >= 0) std::cout << ", best mAP " << result.best_map;
  std::cout << "\ncheckpoint " << cfg.train.checkpoint_out << std::endl;
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  cli::RunConfig cfg = load_config(args);
  if (cfg.eval.dataset_dir.empty()) throw ConfigError("eval.dataset_dir is required");
  if (cfg.eval.checkpoint.empty()) throw ConfigError("eval.checkpoint is required");

  train::ClipDataset ds(cfg.eval.dataset_dir, cfg.features);
  cfg.model.audio_in_channels = cfg.features.audio_planes(ds.manifest().audio_channels);

  const auto meta0 = model::read_checkpoint_meta(cfg.eval.checkpoint);
  cfg.model.profile = model::profile_from_string(meta0.profile);
  cfg.model.variant = model::variant_from_string(meta0.variant);
  model::Network<float> net(cfg.model);
  const auto meta = model::load_checkpoint(cfg.eval.checkpoint, net, nullptr, cfg.compat_hash(),
                                           args.force);

  const eval::MapGranularity gran = cfg.eval.granularity == "per_scene"
                                        ? eval::MapGranularity::PerScene
                                        : eval::MapGranularity::Pooled;
  const auto outputs = eval::evaluate_model(net, ds, cfg.eval.batch, gran);

  std::vector<eval::BaselineKind> kinds;
  for (const auto& name : cfg.eval.baselines) {
    if (name == "all") {
      kinds = eval::all_baselines();
      break;
    }
    kinds.push_back(eval::baseline_from_string(name));
  }
  const auto baseline_maps = eval::evaluate_baselines(ds, kinds, gran);

  json metrics;
  metrics["variant"] = model::to_string(cfg.model.variant);
  metrics["profile"] = model::to_string(cfg.model.profile);
  metrics["map"] = outputs.map;
  metrics["granularity"] = cfg.eval.granularity;
  metrics["baselines"] = baseline_maps;
  metrics["config_hash"] = meta.config_hash;
  metrics["dataset_hash"] = ds.manifest().dataset_hash;
  metrics["checkpoint_step"] = meta.step;
  metrics["seed"] = cfg.model_seed;
  {
    std::ofstream f(cfg.eval.metrics_out);
    if (!f) throw std::runtime_error("cannot open " + cfg.eval.metrics_out);
    f << metrics.dump(2) << "\n";
  }
  if (!cfg.eval.records_csv.empty()) eval::write_records_csv(cfg.eval.records_csv, outputs.records);

  if (!cfg.eval.overlay_dir.empty() && cfg.eval.overlay_frames > 0) {
    fs::create_directories(cfg.eval.overlay_dir);
    int written = 0;
    const bool need_visual = model::variant_has_visual(cfg.model.variant);
    const bool need_audio = model::variant_has_audio(cfg.model.variant);
    for (int64_t ci = 0; ci < ds.size() && written < cfg.eval.overlay_frames; ++ci) {
      const train::ClipSample clip = ds.get(ci);
      const std::vector<train::ClipSample> one = {clip};
      const train::Batch b = train::make_batch(one, need_visual, need_audio);
      nn::Tensor<float> logits =
          net.forward(need_visual ? &b.visual : nullptr, need_audio ? &b.audio : nullptr);
      const auto prob = nn::attended_probability(logits);
      for (int k = 0; k < kVisFrames && written < cfg.eval.overlay_frames; ++k, ++written) {
        const auto& ann = clip.vis_frames[static_cast<size_t>(k)];
        char name[64];
        std::snprintf(name, sizeof(name), "overlay_%llu_%05d.png",
                      static_cast<unsigned long long>(clip.scene_seed), ann.frame_index);
        eval::write_overlay_png((fs::path(cfg.eval.overlay_dir) / name).string(), ann,
                                clip.scene_seed,
                                prob.data() + static_cast<int64_t>(k) * kImageH * kImageW);
      }
    }
  }

  std::cout << "mAP " << outputs.map;
  for (const auto& [name, v] : baseline_maps) std::cout << "  " << name << " " << v;
  std::cout << "\nmetrics " << cfg.eval.metrics_out << std::endl;
  return 0;
}

int cmd_selftest(const std::string& profile_name) {
  model::ModelConfig mc;
  mc.profile = model::profile_from_string(profile_name);
  mc.variant = model::Variant::AudiovisualTf;
  model::Network<float> net(mc);
  net.init(1);
  nn::Tensor<float> vis({1, 1, kVisFrames, kImageH, kImageW});
  nn::Tensor<float> aud({1, 3, kClipFrames, kImageH, kImageW});
  Rng rng(7);
  vis.randn(rng, 0.5);
  aud.randn(rng, 0.5);
  const auto logits = net.forward(&vis, &aud);
  auto shape = [](const nn::Tensor<float>& t) {
    std::string s = t.shape_str();
    return s;
  };
  std::cout << "profile " << profile_name << "\n"
            << "  Z_V        " << shape(net.zv()) << "\n"
            << "  Z_A pre    " << shape(net.za_prepool()) << "\n"
            << "  Z_A pooled " << shape(net.za_pooled()) << "\n"
            << "  fused      " << shape(net.fused()) << "\n"
            << "  tokens     " << net.token_len() << "\n"
            << "  output     " << shape(logits) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"earshot: egocentric listening-target localization testbed"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string selftest_profile = "tiny";

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", args.config_path, "JSON config file")->required();
    }
    sub->add_option("--workers", args.workers, "worker threads (0 = all cores)");
    sub->add_option("--seed", args.seed, "override dataset/train/model seeds");
    sub->add_flag("--force", args.force, "overwrite outputs / ignore hash mismatches");
    sub->add_flag("--deterministic", args.deterministic, "force deterministic training mode");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  add_common(gen, true);
  CLI::App* tr = app.add_subcommand("train", "train a model");
  add_common(tr, true);
  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint and baselines");
  add_common(ev, true);
  CLI::App* st = app.add_subcommand("selftest", "print the shape contract table");
  st->add_option("--profile", selftest_profile, "paper or tiny");
  st->add_option("--workers", args.workers, "worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);
  set_num_workers(args.workers);

  try {
    if (gen->parsed()) return cmd_gen_data(args);
    if (tr->parsed()) return cmd_train(args);
    if (ev->parsed()) return cmd_eval(args);
    if (st->parsed()) return cmd_selftest(selftest_profile);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const HashMismatchError& e) {
    std::cerr << "hash mismatch: " << e.what() << std::endl;
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << std::endl;
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
