#include "earshot/audio/wav.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace earshot::audio {

namespace {

void put_u32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(static_cast<uint8_t>(x));
  v.push_back(static_cast<uint8_t>(x >> 8));
  v.push_back(static_cast<uint8_t>(x >> 16));
  v.push_back(static_cast<uint8_t>(x >> 24));
}
void put_u16(std::vector<uint8_t>& v, uint16_t x) {
  v.push_back(static_cast<uint8_t>(x));
  v.push_back(static_cast<uint8_t>(x >> 8));
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}
uint16_t get_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

}  // namespace

void write_wav(const std::string& path, const std::vector<AudioFrame>& frames, int sample_rate) {
  if (frames.empty()) throw std::runtime_error("write_wav: no frames");
  const int ch = frames[0].channels;
  const int64_t total = static_cast<int64_t>(frames.size()) * kSamplesPerFrame;
  const uint32_t data_bytes = static_cast<uint32_t>(total * ch * 4);

  std::vector<uint8_t> head;
  head.insert(head.end(), {'R', 'I', 'F', 'F'});
  put_u32(head, 36 + data_bytes);
  head.insert(head.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(head, 16);
  put_u16(head, 3);  // IEEE float
  put_u16(head, static_cast<uint16_t>(ch));
  put_u32(head, static_cast<uint32_t>(sample_rate));
  put_u32(head, static_cast<uint32_t>(sample_rate * ch * 4));
  put_u16(head, static_cast<uint16_t>(ch * 4));
  put_u16(head, 32);
  head.insert(head.end(), {'d', 'a', 't', 'a'});
  put_u32(head, data_bytes);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_wav: cannot open " + path);
  f.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
  std::vector<float> inter(static_cast<size_t>(kSamplesPerFrame) * ch);
  for (const auto& fr : frames) {
    for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
      for (int c = 0; c < ch; ++c) inter[static_cast<size_t>(i * ch + c)] = fr.channel(c)[i];
    }
    f.write(reinterpret_cast<const char*>(inter.data()),
            static_cast<std::streamsize>(inter.size() * 4));
  }
}

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_wav: cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("read_wav: not a WAV file: " + path);
  }
  WavData out;
  size_t pos = 12;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t len = get_u32(bytes.data() + pos + 4);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      const uint16_t tag = get_u16(bytes.data() + pos + 8);
      if (tag != 3) throw std::runtime_error("read_wav: expected float format");
      out.channels = get_u16(bytes.data() + pos + 10);
      out.sample_rate = static_cast<int>(get_u32(bytes.data() + pos + 12));
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error("read_wav: data before fmt");
      const size_t n = len / 4;
      out.samples.resize(n);
      std::memcpy(out.samples.data(), bytes.data() + pos + 8, n * 4);
    }
    pos += 8 + len + (len & 1);
  }
  return out;
}

std::vector<AudioFrame> wav_to_frames(const WavData& wav) {
  const int ch = wav.channels;
  const int64_t n_frames = wav.frames() / kSamplesPerFrame;
  std::vector<AudioFrame> out(static_cast<size_t>(n_frames));
  for (int64_t fidx = 0; fidx < n_frames; ++fidx) {
    AudioFrame& fr = out[static_cast<size_t>(fidx)];
    fr.channels = ch;
    fr.samples.resize(static_cast<size_t>(ch) * kSamplesPerFrame);
    const float* base = wav.samples.data() + fidx * kSamplesPerFrame * ch;
    for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
      for (int c = 0; c < ch; ++c) fr.channel(c)[i] = base[i * ch + c];
    }
  }
  return out;
}

}  // namespace earshot::audio
