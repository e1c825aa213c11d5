#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "earshot/core/rng.hpp"
#include "earshot/eval/baselines.hpp"
#include "earshot/eval/map.hpp"
#include "earshot/eval/scoring.hpp"

using namespace earshot;
using eval::EvalRecord;

namespace {

// Independent AP oracle: enumerate distinct score thresholds descending and
// integrate precision over recall increments. Handles ties by construction
// (every record at the same score enters together).
double brute_force_ap(const std::vector<EvalRecord>& records) {
  std::vector<double> scores;
  int64_t total_pos = 0;
  for (const auto& r : records) {
    scores.push_back(r.score);
    total_pos += r.attended ? 1 : 0;
  }
  REQUIRE(total_pos > 0);
  std::sort(scores.begin(), scores.end(), std::greater<double>());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  double ap = 0;
  int64_t prev_tp = 0;
  for (double s : scores) {
    int64_t tp = 0, seen = 0;
    for (const auto& r : records) {
      if (r.score >= s) {
        ++seen;
        tp += r.attended ? 1 : 0;
      }
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += precision * static_cast<double>(tp - prev_tp);
    prev_tp = tp;
  }
  return ap / static_cast<double>(total_pos);
}

EvalRecord rec(double score, bool attended, uint64_t scene = 0, int frame = 0, int person = 0) {
  return {scene, frame, person, score, attended};
}

}  // namespace

TEST_CASE("AP: perfect ranking gives 1.0") {
  std::vector<EvalRecord> r = {rec(0.9, true), rec(0.8, true), rec(0.3, false), rec(0.1, false)};
  CHECK(eval::compute_ap(r) == doctest::Approx(1.0));
}

TEST_CASE("AP: the hand-computed interleaved case") {
  std::vector<EvalRecord> r = {rec(0.9, true), rec(0.8, false), rec(0.7, true), rec(0.6, false)};
  CHECK(eval::compute_ap(r) == doctest::Approx((1.0 + 2.0 / 3.0) / 2).epsilon(1e-12));
}

TEST_CASE("AP: zero positives is an error") {
  std::vector<EvalRecord> r = {rec(0.9, false)};
  CHECK_THROWS_AS(eval::compute_ap(r), NumericError);
}

TEST_CASE("AP equals the brute-force oracle exactly on 1000 random small instances") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(10));
    std::vector<EvalRecord> records;
    bool any_pos = false;
    for (int i = 0; i < n; ++i) {
      // Coarse scores force frequent ties.
      const double score = std::floor(rng.uniform() * 4.0) / 4.0;
      const bool pos = rng.bernoulli(0.4);
      any_pos |= pos;
      records.push_back(rec(score, pos, 0, i, i));
    }
    if (!any_pos) {
      records.push_back(rec(rng.uniform(), true, 0, n, n));
    }
    CHECK(eval::compute_ap(records) == brute_force_ap(records));
  }
}

TEST_CASE("AP is invariant under positive monotone score transforms") {
  Rng rng(32);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 40; ++i) {
    records.push_back(rec(rng.uniform(), rng.bernoulli(0.3), 0, i, i));
  }
  records.push_back(rec(0.5, true, 0, 99, 99));
  const double base = eval::compute_ap(records);
  auto transformed = records;
  for (auto& r : transformed) r.score = std::exp(3.0 * r.score) + 7.0;
  CHECK(eval::compute_ap(transformed) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("pooled mAP ignores scene relabeling; per-scene averages per scene") {
  Rng rng(33);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 60; ++i) {
    records.push_back(rec(rng.uniform(), rng.bernoulli(0.4), i % 3, i, i));
  }
  records.push_back(rec(0.9, true, 0, 100, 100));
  const double pooled = eval::compute_map(records, eval::MapGranularity::Pooled);
  auto relabeled = records;
  for (auto& r : relabeled) r.scene_id = (r.scene_id + 5) * 11;
  CHECK(eval::compute_map(relabeled, eval::MapGranularity::Pooled) == pooled);
  CHECK(pooled >= 0.0);
  CHECK(pooled <= 1.0);
  const double per_scene = eval::compute_map(records, eval::MapGranularity::PerScene);
  CHECK(per_scene >= 0.0);
  CHECK(per_scene <= 1.0);
}

TEST_CASE("person score: uniform logits 0.5, saturated 0.999+, handcrafted max") {
  std::vector<float> prob(static_cast<size_t>(kImageH) * kImageW, 0.5f);
  sim::PersonBox box;
  box.x0 = 10;
  box.y0 = 10;
  box.x1 = 14;
  box.y1 = 14;
  CHECK(eval::person_score(prob.data(), box) == doctest::Approx(0.5));

  // Label-as-logits saturation: p = sigmoid(20) inside the box.
  const float sat = 1.f / (1.f + std::exp(-20.f));
  for (int y = 10; y < 14; ++y)
    for (int x = 10; x < 14; ++x) prob[static_cast<size_t>(y) * kImageW + x] = sat;
  CHECK(eval::person_score(prob.data(), box) > 0.999);

  // Handcrafted 4x4 patch with a known maximum.
  float expect = 0;
  for (int y = 10; y < 14; ++y) {
    for (int x = 10; x < 14; ++x) {
      const float v = 0.01f * static_cast<float>((y - 10) * 4 + (x - 10));
      prob[static_cast<size_t>(y) * kImageW + x] = v;
      expect = std::max(expect, v);
    }
  }
  CHECK(eval::person_score(prob.data(), box) == doctest::Approx(expect));

  sim::PersonBox empty;
  empty.x0 = 5;
  empty.x1 = 5;
  empty.y0 = 5;
  empty.y1 = 9;
  CHECK_THROWS(eval::person_score(prob.data(), empty));
}

namespace {

sim::FrameAnnotation fixture_frame() {
  // Four people: near-center small silent, off-center speaking in-group,
  // large speaking out-of-group, far small speaking in-group.
  sim::FrameAnnotation ann;
  ann.frame_index = 3;
  auto mk = [](int id, double cx, double cy, double half, bool speaking, bool in_group,
               float env, float dist) {
    sim::PersonBox p;
    p.person_id = id;
    p.x0 = cx - half;
    p.x1 = cx + half;
    p.y0 = cy - half;
    p.y1 = cy + half;
    p.speaking = speaking;
    p.in_wearer_group = in_group;
    p.attended = speaking && in_group;
    p.envelope = env;
    p.distance_m = dist;
    return p;
  };
  ann.persons.push_back(mk(1, 106, 100, 6, false, true, 0.f, 1.2f));   // dead center, silent
  ann.persons.push_back(mk(2, 140, 100, 8, true, true, 0.8f, 1.0f));   // speaking in-group
  ann.persons.push_back(mk(3, 60, 95, 12, true, false, 0.9f, 0.8f));   // speaking out-of-group
  ann.persons.push_back(mk(4, 180, 105, 4, true, true, 0.4f, 1.9f));   // far speaking in-group
  return ann;
}

}  // namespace

TEST_CASE("baselines: selection rules on a handcrafted frame") {
  const auto ann = fixture_frame();
  const auto ctx = eval::make_baseline_context(ann);

  // Perfect ASL: every speaker scores 1.
  auto s = eval::baseline_scores(ann, ctx, eval::BaselineKind::PerfectASL);
  CHECK(s == std::vector<double>{0, 1, 1, 1});

  // CP1: nearest-to-center person (id 1) is silent -> nobody selected.
  s = eval::baseline_scores(ann, ctx, eval::BaselineKind::CP1);
  CHECK(s == std::vector<double>{0, 0, 0, 0});

  // CP2: nearest-to-center speaker is id 2.
  s = eval::baseline_scores(ann, ctx, eval::BaselineKind::CP2);
  CHECK(s == std::vector<double>{0, 1, 0, 0});

  // CS1: largest box is id 3 and it speaks.
  s = eval::baseline_scores(ann, ctx, eval::BaselineKind::CS1);
  CHECK(s == std::vector<double>{0, 0, 1, 0});

  // CS2: largest speaking box is id 3.
  s = eval::baseline_scores(ann, ctx, eval::BaselineKind::CS2);
  CHECK(s == std::vector<double>{0, 0, 1, 0});

  // LS1: loudest by envelope^2/d^2 is id 3 (0.81/0.64 > 0.64/1.0 > ...).
  s = eval::baseline_scores(ann, ctx, eval::BaselineKind::LS1);
  CHECK(s == std::vector<double>{0, 0, 1, 0});

  // LS2 without wearer speech matches LS1; with it, selects nobody.
  s = eval::baseline_scores(ann, ctx, eval::BaselineKind::LS2);
  CHECK(s == std::vector<double>{0, 0, 1, 0});
  auto speaking_ann = ann;
  speaking_ann.wearer_speaking = true;
  const auto ctx2 = eval::make_baseline_context(speaking_ann);
  s = eval::baseline_scores(speaking_ann, ctx2, eval::BaselineKind::LS2);
  CHECK(s == std::vector<double>{0, 0, 0, 0});

  // CS1 variant: make the largest person silent -> nobody.
  auto silent_large = ann;
  silent_large.persons[2].speaking = false;
  silent_large.persons[2].attended = false;
  const auto ctx3 = eval::make_baseline_context(silent_large);
  s = eval::baseline_scores(silent_large, ctx3, eval::BaselineKind::CS1);
  CHECK(s == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("baseline name round trip and unknown kind rejection") {
  for (auto k : eval::all_baselines()) {
    CHECK(eval::baseline_from_string(eval::to_string(k)) == k);
  }
  CHECK_THROWS_AS(eval::baseline_from_string("nope"), ConfigError);
}

TEST_CASE("PerfectASL: mAP 1.0 when every speaker is in-group, below 1.0 otherwise") {
  // All-in-group frames.
  std::vector<EvalRecord> records;
  Rng rng(41);
  for (int f = 0; f < 50; ++f) {
    auto ann = fixture_frame();
    ann.persons[2].in_wearer_group = true;  // now every speaker is in-group
    ann.persons[2].attended = ann.persons[2].speaking;
    const auto ctx = eval::make_baseline_context(ann);
    const auto scores = eval::baseline_scores(ann, ctx, eval::BaselineKind::PerfectASL);
    for (size_t i = 0; i < ann.persons.size(); ++i) {
      records.push_back(rec(scores[i], ann.persons[i].attended, 0, f, ann.persons[i].person_id));
    }
  }
  CHECK(eval::compute_ap(records) == doctest::Approx(1.0));

  // Mixed frames: an out-of-group speaker ties positives at score 1.
  records.clear();
  for (int f = 0; f < 50; ++f) {
    const auto ann = fixture_frame();
    const auto ctx = eval::make_baseline_context(ann);
    const auto scores = eval::baseline_scores(ann, ctx, eval::BaselineKind::PerfectASL);
    for (size_t i = 0; i < ann.persons.size(); ++i) {
      records.push_back(rec(scores[i], ann.persons[i].attended, 0, f, ann.persons[i].person_id));
    }
  }
  CHECK(eval::compute_ap(records) < 1.0);
}
