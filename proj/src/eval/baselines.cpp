#include "earshot/eval/baselines.hpp"

#include <cmath>
#include <limits>

namespace earshot::eval {

BaselineKind baseline_from_string(const std::string& s) {
  if (s == "perfect_asl") return BaselineKind::PerfectASL;
  if (s == "cp1") return BaselineKind::CP1;
  if (s == "cp2") return BaselineKind::CP2;
  if (s == "cs1") return BaselineKind::CS1;
  if (s == "cs2") return BaselineKind::CS2;
  if (s == "ls1") return BaselineKind::LS1;
  if (s == "ls2") return BaselineKind::LS2;
  throw ConfigError("unknown baseline: " + s);
}

const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::PerfectASL: return "perfect_asl";
    case BaselineKind::CP1: return "cp1";
    case BaselineKind::CP2: return "cp2";
    case BaselineKind::CS1: return "cs1";
    case BaselineKind::CS2: return "cs2";
    case BaselineKind::LS1: return "ls1";
    case BaselineKind::LS2: return "ls2";
  }
  throw ConfigError("unknown baseline kind");
}

const std::vector<BaselineKind>& all_baselines() {
  static const std::vector<BaselineKind> all = {
      BaselineKind::PerfectASL, BaselineKind::CP1, BaselineKind::CP2, BaselineKind::CS1,
      BaselineKind::CS2,        BaselineKind::LS1, BaselineKind::LS2};
  return all;
}

BaselineContext make_baseline_context(const sim::FrameAnnotation& ann) {
  BaselineContext ctx;
  ctx.wearer_speaking = ann.wearer_speaking;
  for (const auto& p : ann.persons) {
    ctx.mic_energy.push_back(static_cast<double>(p.envelope) * p.envelope);
    ctx.distance_m.push_back(p.distance_m);
  }
  return ctx;
}

namespace {

double center_distance(const sim::PersonBox& p) {
  const double cx = (p.x0 + p.x1) / 2 - kImageW / 2.0;
  const double cy = (p.y0 + p.y1) / 2 - kImageH / 2.0;
  return std::sqrt(cx * cx + cy * cy);
}

double box_area(const sim::PersonBox& p) { return (p.x1 - p.x0) * (p.y1 - p.y0); }

// argmin/argmax with lowest-person-id tie break.
template <typename Fn, typename Pred>
int select(const std::vector<sim::PersonBox>& persons, Fn value, Pred eligible, bool minimize) {
  int best = -1;
  double best_v = 0;
  for (size_t i = 0; i < persons.size(); ++i) {
    if (!eligible(persons[i])) continue;
    const double v = value(i);
    const bool better =
        best < 0 || (minimize ? v < best_v : v > best_v) ||
        (v == best_v && persons[i].person_id < persons[static_cast<size_t>(best)].person_id);
    if (better) {
      best = static_cast<int>(i);
      best_v = v;
    }
  }
  return best;
}

}  // namespace

std::vector<double> baseline_scores(const sim::FrameAnnotation& ann, const BaselineContext& ctx,
                                    BaselineKind kind) {
  const auto& persons = ann.persons;
  std::vector<double> scores(persons.size(), 0.0);
  auto any = [](const sim::PersonBox&) { return true; };
  auto speaking = [](const sim::PersonBox& p) { return p.speaking; };

  switch (kind) {
    case BaselineKind::PerfectASL:
      for (size_t i = 0; i < persons.size(); ++i) scores[i] = persons[i].speaking ? 1.0 : 0.0;
      break;
    case BaselineKind::CP1: {
      // Nearest head to the FOV center; attended only if speaking.
      const int idx = select(persons, [&](size_t i) { return center_distance(persons[i]); }, any,
                             true);
      if (idx >= 0 && persons[static_cast<size_t>(idx)].speaking)
        scores[static_cast<size_t>(idx)] = 1.0;
      break;
    }
    case BaselineKind::CP2: {
      const int idx = select(persons, [&](size_t i) { return center_distance(persons[i]); },
                             speaking, true);
      if (idx >= 0) scores[static_cast<size_t>(idx)] = 1.0;
      break;
    }
    case BaselineKind::CS1: {
      const int idx = select(persons, [&](size_t i) { return box_area(persons[i]); }, any, false);
      if (idx >= 0 && persons[static_cast<size_t>(idx)].speaking)
        scores[static_cast<size_t>(idx)] = 1.0;
      break;
    }
    case BaselineKind::CS2: {
      const int idx =
          select(persons, [&](size_t i) { return box_area(persons[i]); }, speaking, false);
      if (idx >= 0) scores[static_cast<size_t>(idx)] = 1.0;
      break;
    }
    case BaselineKind::LS1:
    case BaselineKind::LS2: {
      if (kind == BaselineKind::LS2 && ctx.wearer_speaking) break;
      auto loudness = [&](size_t i) {
        const double d = std::max(1e-6, ctx.distance_m[i]);
        return ctx.mic_energy[i] / (d * d);
      };
      const int idx = select(persons, loudness, speaking, false);
      if (idx >= 0) scores[static_cast<size_t>(idx)] = 1.0;
      break;
    }
  }
  return scores;
}

}  // namespace earshot::eval
