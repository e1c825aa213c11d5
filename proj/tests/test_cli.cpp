#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "earshot/cli/run_config.hpp"
#include "earshot/data/dataset.hpp"
#include "earshot/model/checkpoint.hpp"

using namespace earshot;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kBin = EARSHOT_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kBin + " " + args + " > /tmp/earshot_cli_out.txt 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string write_config(const json& j, const std::string& name) {
  const std::string path = (fs::temp_directory_path() / name).string();
  std::ofstream f(path);
  f << j.dump(2);
  return path;
}

json base_config(const std::string& tag) {
  const std::string root = (fs::temp_directory_path() / ("earshot_cli_" + tag)).string();
  return json{
      {"dataset",
       {{"out_dir", root + "/data"}, {"n_scenes", 2}, {"seed", 3}, {"duration_s", 1.6}}},
      {"features", {{"visual_mode", "bbox"}}},
      {"model", {{"profile", "tiny"}, {"variant", "audiovisual"}, {"seed", 4}}},
      {"train",
       {{"dataset_dir", root + "/data"},
        {"lr", 1e-3},
        {"batch", 2},
        {"steps", 2},
        {"checkpoint_out", root + "/ckpt.bin"},
        {"curve_csv", root + "/curve.csv"}}},
      {"eval",
       {{"dataset_dir", root + "/data"},
        {"checkpoint", root + "/ckpt.bin"},
        {"baselines", "all"},
        {"metrics_out", root + "/metrics.json"},
        {"records_csv", root + "/records.csv"},
        {"overlay_dir", root + "/overlays"},
        {"overlay_frames", 5}}}};
}

}  // namespace

TEST_CASE("config schema rejects unknown keys and bad values with exit 2") {
  json cfg = base_config("schema");
  cfg["dataset"]["not_a_key"] = 1;
  const std::string path = write_config(cfg, "earshot_bad_key.json");
  CHECK(run("gen-data --config " + path) == 2);

  json cfg2 = base_config("schema2");
  cfg2["dataset"]["duration_s"] = 0.1;  // below the 0.8 s clip minimum
  const std::string path2 = write_config(cfg2, "earshot_bad_duration.json");
  CHECK(run("gen-data --config " + path2) == 2);

  // Unknown section.
  json cfg3 = base_config("schema3");
  cfg3["nonsense"] = json::object();
  const std::string path3 = write_config(cfg3, "earshot_bad_section.json");
  CHECK(run("gen-data --config " + path3) == 2);
}

TEST_CASE("gen-data: deterministic manifests, --force semantics, config echo") {
  json cfg = base_config("gen");
  cfg["dataset"]["layout_mix_a"] = 0.67;
  const std::string path = write_config(cfg, "earshot_gen.json");
  REQUIRE(run("gen-data --config " + path + " --force") == 0);
  const auto man1 = data::read_manifest(cfg["dataset"]["out_dir"]);
  // Existing dir without --force fails as a config error.
  CHECK(run("gen-data --config " + path) == 2);
  REQUIRE(run("gen-data --config " + path + " --force") == 0);
  const auto man2 = data::read_manifest(cfg["dataset"]["out_dir"]);
  CHECK(man1.dataset_hash == man2.dataset_hash);
  CHECK(man1.layout_mix_a == 0.67);  // config echoed verbatim
  CHECK(man1.aggregate.mean_speakers_per_frame > 0.0);
}

TEST_CASE("train then eval: artifacts, hash chain, resume monotonicity") {
  json cfg = base_config("flow");
  const std::string path = write_config(cfg, "earshot_flow.json");
  REQUIRE(run("gen-data --config " + path + " --force") == 0);
  REQUIRE(run("train --config " + path) == 0);

  const std::string ckpt = cfg["train"]["checkpoint_out"];
  const auto meta = model::read_checkpoint_meta(ckpt);
  CHECK(meta.step == 2);
  CHECK(meta.variant == "audiovisual");

  // Resume continues the step count.
  json cfg_resume = cfg;
  cfg_resume["train"]["resume"] = ckpt;
  const std::string rpath = write_config(cfg_resume, "earshot_flow_resume.json");
  REQUIRE(run("train --config " + rpath) == 0);
  CHECK(model::read_checkpoint_meta(ckpt).step == 4);

  REQUIRE(run("eval --config " + path) == 0);
  std::ifstream mf(cfg["eval"]["metrics_out"].get<std::string>());
  REQUIRE(mf.good());
  const json metrics = json::parse(mf);
  CHECK(metrics.at("variant") == "audiovisual");
  CHECK(metrics.at("map").is_number());
  CHECK(metrics.at("baselines").size() == 7);
  // Metrics carry the checkpoint's compatibility hash.
  CHECK(metrics.at("config_hash") == meta.config_hash);

  // Overlay count equals the requested frame count.
  int pngs = 0;
  for (const auto& e : fs::directory_iterator(cfg["eval"]["overlay_dir"].get<std::string>())) {
    pngs += e.path().extension() == ".png" ? 1 : 0;
  }
  CHECK(pngs == 5);

  // Records CSV exists with a header.
  std::ifstream rc(cfg["eval"]["records_csv"].get<std::string>());
  std::string header;
  std::getline(rc, header);
  CHECK(header == "scene_id,frame_index,person_id,score,attended");
}

TEST_CASE("eval refuses a checkpoint trained under different features (exit 3)") {
  json cfg = base_config("hashes");
  const std::string path = write_config(cfg, "earshot_hashes.json");
  REQUIRE(run("gen-data --config " + path + " --force") == 0);
  REQUIRE(run("train --config " + path) == 0);
  json cfg2 = cfg;
  cfg2["features"]["visual_mode"] = "heads";  // different compatibility hash
  const std::string path2 = write_config(cfg2, "earshot_hashes2.json");
  CHECK(run("eval --config " + path2) == 3);
  CHECK(run("eval --config " + path2 + " --force") == 0);
}

TEST_CASE("numeric blowups exit with code 4") {
  json cfg = base_config("numeric");
  cfg["train"]["lr"] = 1e30;
  cfg["train"]["steps"] = 4;
  const std::string path = write_config(cfg, "earshot_numeric.json");
  REQUIRE(run("gen-data --config " + path + " --force") == 0);
  CHECK(run("train --config " + path) == 4);
}

TEST_CASE("environment overrides are applied and recorded in the config hash") {
  json cfg = base_config("env");
  const std::string path = write_config(cfg, "earshot_env.json");
  const auto plain = cli::RunConfig::load(path);
  setenv("EARSHOT_TRAIN_LR", "0.5", 1);
  const auto overridden = cli::RunConfig::load(path);
  unsetenv("EARSHOT_TRAIN_LR");
  CHECK(plain.train.opts.lr == 1e-3);
  CHECK(overridden.train.opts.lr == 0.5);
  CHECK(plain.config_hash != overridden.config_hash);
}

TEST_CASE("selftest prints the tiny shape table") {
  CHECK(run("selftest --profile tiny") == 0);
  std::ifstream out("/tmp/earshot_cli_out.txt");
  std::string text((std::istreambuf_iterator<char>(out)), std::istreambuf_iterator<char>());
  CHECK(text.find("(64,1,13,14)") != std::string::npos);
  CHECK(text.find("tokens     182") != std::string::npos);
  CHECK(text.find("(1,2,8,200,212)") != std::string::npos);
}
