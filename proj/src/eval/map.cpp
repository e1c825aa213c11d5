#include "earshot/eval/map.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace earshot::eval {

double compute_ap(const std::vector<EvalRecord>& records) {
  int64_t total_pos = 0;
  for (const auto& r : records) total_pos += r.attended ? 1 : 0;
  if (total_pos == 0) throw NumericError("compute_ap: no positive records");

  std::vector<const EvalRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const EvalRecord* a, const EvalRecord* b) { return a->score > b->score; });

  double ap = 0;
  int64_t tp = 0, seen = 0;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    int64_t block_tp = 0;
    while (j < sorted.size() && sorted[j]->score == sorted[i]->score) {
      block_tp += sorted[j]->attended ? 1 : 0;
      ++j;
    }
    tp += block_tp;
    seen += static_cast<int64_t>(j - i);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += precision * static_cast<double>(block_tp);
    i = j;
  }
  return ap / static_cast<double>(total_pos);
}

double compute_map(const std::vector<EvalRecord>& records, MapGranularity granularity) {
  if (granularity == MapGranularity::Pooled) return compute_ap(records);
  std::map<uint64_t, std::vector<EvalRecord>> by_scene;
  for (const auto& r : records) by_scene[r.scene_id].push_back(r);
  double sum = 0;
  int64_t n = 0;
  for (const auto& [scene, recs] : by_scene) {
    bool has_pos = false;
    for (const auto& r : recs) has_pos |= r.attended;
    if (!has_pos) continue;
    sum += compute_ap(recs);
    ++n;
  }
  if (n == 0) throw NumericError("compute_map: no scene with positives");
  return sum / static_cast<double>(n);
}

void write_records_csv(const std::string& path, const std::vector<EvalRecord>& records) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_records_csv: cannot open " + path);
  f << "scene_id,frame_index,person_id,score,attended\n";
  for (const auto& r : records) {
    f << r.scene_id << ',' << r.frame_index << ',' << r.person_id << ',' << r.score << ','
      << (r.attended ? 1 : 0) << '\n';
  }
}

}  // namespace earshot::eval
