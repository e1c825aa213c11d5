#include "earshot/eval/scoring.hpp"

#include <stdexcept>

#include "earshot/nn/loss.hpp"
#include "earshot/sim/projection.hpp"

namespace earshot::eval {

double person_score(const float* prob, const sim::PersonBox& box) {
  const sim::PixelSpan s = sim::rasterize_box(box.x0, box.y0, box.x1, box.y1);
  if (s.empty()) throw std::invalid_argument("person_score: empty bbox");
  double best = 0;
  for (int y = s.y0; y < s.y1; ++y) {
    const float* row = prob + static_cast<int64_t>(y) * kImageW;
    for (int x = s.x0; x < s.x1; ++x) best = std::max(best, static_cast<double>(row[x]));
  }
  return best;
}

EvalOutputs evaluate_model(model::Network<float>& net, const train::ClipDataset& ds,
                           int batch_size, MapGranularity granularity) {
  const bool need_visual = model::variant_has_visual(net.config().variant);
  const bool need_audio = model::variant_has_audio(net.config().variant);
  EvalOutputs out;
  std::vector<train::ClipSample> pending;
  std::vector<int64_t> pending_ids;

  auto flush = [&]() {
    if (pending.empty()) return;
    const train::Batch batch = train::make_batch(pending, need_visual, need_audio);
    nn::Tensor<float> logits =
        net.forward(need_visual ? &batch.visual : nullptr, need_audio ? &batch.audio : nullptr);
    const nn::Tensor<float> prob = nn::attended_probability(logits);
    const int64_t plane = kImageH * kImageW;
    for (size_t bi = 0; bi < pending.size(); ++bi) {
      const train::ClipSample& clip = pending[bi];
      for (int k = 0; k < kVisFrames; ++k) {
        const float* frame_prob =
            prob.data() + (static_cast<int64_t>(bi) * kVisFrames + k) * plane;
        const sim::FrameAnnotation& ann = clip.vis_frames[static_cast<size_t>(k)];
        for (const auto& person : ann.persons) {
          EvalRecord rec;
          rec.scene_id = clip.scene_seed;
          rec.frame_index = ann.frame_index;
          rec.person_id = person.person_id;
          rec.score = person_score(frame_prob, person);
          rec.attended = person.attended;
          out.records.push_back(rec);
        }
      }
    }
    pending.clear();
    pending_ids.clear();
  };

  for (int64_t i = 0; i < ds.size(); ++i) {
    pending.push_back(ds.get(i));
    pending_ids.push_back(i);
    if (static_cast<int>(pending.size()) == batch_size) flush();
  }
  flush();
  out.map = compute_map(out.records, granularity);
  return out;
}

std::map<std::string, double> evaluate_baselines(
    const train::ClipDataset& ds, const std::vector<BaselineKind>& kinds,
    MapGranularity granularity, std::map<std::string, std::vector<EvalRecord>>* records_out) {
  std::map<std::string, std::vector<EvalRecord>> records;
  for (const auto& ref : ds.clips()) {
    const data::SceneData& sd = ds.scene_data(ref.scene_index);
    for (int k = 0; k < kVisFrames; ++k) {
      const auto& ann = sd.annotations[static_cast<size_t>(ref.t0 + k * kVisStride)];
      const BaselineContext ctx = make_baseline_context(ann);
      for (BaselineKind kind : kinds) {
        const auto scores = baseline_scores(ann, ctx, kind);
        auto& recs = records[to_string(kind)];
        for (size_t pi = 0; pi < ann.persons.size(); ++pi) {
          recs.push_back({ref.scene_seed, ann.frame_index, ann.persons[pi].person_id, scores[pi],
                          ann.persons[pi].attended});
        }
      }
    }
  }
  std::map<std::string, double> maps;
  for (auto& [name, recs] : records) maps[name] = compute_map(recs, granularity);
  if (records_out) *records_out = std::move(records);
  return maps;
}

}  // namespace earshot::eval
