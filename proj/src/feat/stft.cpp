#include "earshot/feat/stft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "earshot/nn/gemm.hpp"

namespace earshot::feat {

namespace {

struct DftMatrices {
  int bins, win;
  std::vector<float> re;  // [bins][win]
  std::vector<float> im;
};

const DftMatrices& dft_matrices(const StftConfig& cfg) {
  static std::map<std::pair<int, int>, DftMatrices> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(cfg.bins, cfg.window_samples);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  DftMatrices m;
  m.bins = cfg.bins;
  m.win = cfg.window_samples;
  m.re.resize(static_cast<size_t>(m.bins) * m.win);
  m.im.resize(static_cast<size_t>(m.bins) * m.win);
  const double n_fft = cfg.fft_len();
  for (int k = 0; k < m.bins; ++k) {
    for (int n = 0; n < m.win; ++n) {
      const double ang = 2.0 * M_PI * k * n / n_fft;
      m.re[static_cast<size_t>(k) * m.win + n] = static_cast<float>(std::cos(ang));
      m.im[static_cast<size_t>(k) * m.win + n] = static_cast<float>(-std::sin(ang));
    }
  }
  return cache.emplace(key, std::move(m)).first->second;
}

}  // namespace

SpectrogramStack stft_stack(const audio::AudioFrame& frame, const StftConfig& cfg) {
  if (frame.channels < 1 ||
      frame.samples.size() != static_cast<size_t>(frame.channels) * kSamplesPerFrame) {
    throw std::invalid_argument("stft_stack: expected channels x 2000 samples");
  }
  const int n_frames = cfg.frames_out();
  const int win = cfg.window_samples;
  const int half = win / 2;
  const auto& dft = dft_matrices(cfg);

  SpectrogramStack out;
  out.rows = frame.channels * cfg.bins;
  out.cols = n_frames;
  out.real.assign(static_cast<size_t>(out.rows) * out.cols, 0.f);
  out.imag.assign(static_cast<size_t>(out.rows) * out.cols, 0.f);

  // Centered frames: frame t covers samples [t*hop - win/2, t*hop + win/2),
  // zero-padded at the block edges.
  std::vector<float> windows(static_cast<size_t>(win) * n_frames);
  for (int c = 0; c < frame.channels; ++c) {
    const float* x = frame.channel(c);
    for (int t = 0; t < n_frames; ++t) {
      const int64_t start = static_cast<int64_t>(t) * cfg.hop_samples - half;
      for (int n = 0; n < win; ++n) {
        const int64_t idx = start + n;
        windows[static_cast<size_t>(n) * n_frames + t] =
            (idx >= 0 && idx < kSamplesPerFrame) ? x[idx] : 0.f;
      }
    }
    // [bins x win] * [win x n_frames]
    nn::gemm<float>(false, false, cfg.bins, n_frames, win, 1.f, dft.re.data(), win,
                    windows.data(), n_frames, 0.f,
                    out.real.data() + static_cast<size_t>(c) * cfg.bins * n_frames, n_frames);
    nn::gemm<float>(false, false, cfg.bins, n_frames, win, 1.f, dft.im.data(), win,
                    windows.data(), n_frames, 0.f,
                    out.imag.data() + static_cast<size_t>(c) * cfg.bins * n_frames, n_frames);
  }
  return out;
}

std::vector<float> istft_channel(const SpectrogramStack& stack, int channel,
                                 const StftConfig& cfg) {
  const int n_frames = cfg.frames_out();
  const int win = cfg.window_samples;
  const int half = win / 2;
  const int n_fft = cfg.fft_len();
  std::vector<double> acc(kSamplesPerFrame, 0.0);
  std::vector<double> cover(kSamplesPerFrame, 0.0);
  const float* re = stack.real.data() + static_cast<size_t>(channel) * cfg.bins * stack.cols;
  const float* im = stack.imag.data() + static_cast<size_t>(channel) * cfg.bins * stack.cols;

  for (int t = 0; t < n_frames; ++t) {
    const int64_t start = static_cast<int64_t>(t) * cfg.hop_samples - half;
    for (int n = 0; n < win; ++n) {
      const int64_t idx = start + n;
      if (idx < 0 || idx >= kSamplesPerFrame) continue;
      // Hermitian-extended inverse DFT evaluated at the window samples.
      double v = re[0 * stack.cols + t];
      for (int k = 1; k < cfg.bins - 1; ++k) {
        const double ang = 2.0 * M_PI * k * n / n_fft;
        v += 2.0 * (re[static_cast<size_t>(k) * stack.cols + t] * std::cos(ang) -
                    im[static_cast<size_t>(k) * stack.cols + t] * std::sin(ang));
      }
      const int knyq = cfg.bins - 1;
      v += re[static_cast<size_t>(knyq) * stack.cols + t] * std::cos(M_PI * n) -
           im[static_cast<size_t>(knyq) * stack.cols + t] * std::sin(M_PI * n);
      acc[static_cast<size_t>(idx)] += v / n_fft;
      cover[static_cast<size_t>(idx)] += 1.0;
    }
  }
  std::vector<float> out(kSamplesPerFrame, 0.f);
  for (int i = 0; i < kSamplesPerFrame; ++i) {
    if (cover[static_cast<size_t>(i)] > 0) {
      out[static_cast<size_t>(i)] = static_cast<float>(acc[static_cast<size_t>(i)] /
                                                       cover[static_cast<size_t>(i)]);
    }
  }
  return out;
}

}  // namespace earshot::feat
