#include "earshot/feat/correlation.hpp"

#include <cmath>
#include <stdexcept>

namespace earshot::feat {

CorrelationMap channel_correlation(const audio::AudioFrame& frame) {
  const int ch = frame.channels;
  if (ch < 1 || frame.samples.size() != static_cast<size_t>(ch) * kSamplesPerFrame) {
    throw std::invalid_argument("channel_correlation: expected channels x 2000 samples");
  }
  std::vector<std::pair<int, int>> pairs;
  if (ch == 1) {
    pairs.emplace_back(0, 0);
  } else {
    for (int i = 0; i < ch; ++i) {
      for (int j = i + 1; j < ch; ++j) pairs.emplace_back(i, j);
    }
  }

  CorrelationMap map;
  map.pairs = static_cast<int>(pairs.size());
  map.rows = map.pairs * kCorrLags;
  map.values.assign(static_cast<size_t>(map.rows) * map.cols, 0.f);

  // Window norms.
  std::vector<double> norms(static_cast<size_t>(ch) * kCorrWindows);
  for (int c = 0; c < ch; ++c) {
    const float* x = frame.channel(c);
    for (int w = 0; w < kCorrWindows; ++w) {
      double e = 0;
      const float* xs = x + w * kCorrWindowLen;
      for (int n = 0; n < kCorrWindowLen; ++n) e += static_cast<double>(xs[n]) * xs[n];
      norms[static_cast<size_t>(c) * kCorrWindows + w] = std::sqrt(e);
    }
  }

  for (size_t p = 0; p < pairs.size(); ++p) {
    const float* xi = frame.channel(pairs[p].first);
    const float* xj = frame.channel(pairs[p].second);
    for (int w = 0; w < kCorrWindows; ++w) {
      const double ni = norms[static_cast<size_t>(pairs[p].first) * kCorrWindows + w];
      const double nj = norms[static_cast<size_t>(pairs[p].second) * kCorrWindows + w];
      if (ni <= 0 || nj <= 0) continue;  // zero-energy window stays 0
      const double inv = 1.0 / (ni * nj);
      const float* ai = xi + w * kCorrWindowLen;
      const float* aj = xj + w * kCorrWindowLen;
      for (int lag = -kCorrMaxLag; lag <= kCorrMaxLag; ++lag) {
        double acc = 0;
        const int n0 = std::max(0, -lag);
        const int n1 = std::min(kCorrWindowLen, kCorrWindowLen - lag);
        for (int n = n0; n < n1; ++n) acc += static_cast<double>(ai[n]) * aj[n + lag];
        map.values[(p * kCorrLags + static_cast<size_t>(lag + kCorrMaxLag)) * kCorrWindows +
                   static_cast<size_t>(w)] = static_cast<float>(acc * inv);
      }
    }
  }
  return map;
}

}  // namespace earshot::feat
