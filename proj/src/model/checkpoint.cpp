#include "earshot/model/checkpoint.hpp"

#include <nlohmann/json.hpp>

namespace earshot::model {

using json = nlohmann::json;

namespace {

constexpr char kMagic[8] = {'E', 'R', 'S', 'H', 'C', 'K', 'P', '1'};

void write_u32(std::ofstream& f, uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), 4);
}
uint32_t read_u32(std::ifstream& f) {
  uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

void write_blob(std::ofstream& f, const void* data, size_t bytes) {
  f.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

json meta_to_json(const CheckpointMeta& m) {
  return json{{"profile", m.profile},
              {"variant", m.variant},
              {"audio_in_channels", m.audio_in_channels},
              {"config_hash", m.config_hash},
              {"dataset_hash", m.dataset_hash},
              {"pool_lo", m.pool_lo},
              {"pool_hi", m.pool_hi},
              {"step", m.step},
              {"has_optimizer", m.has_optimizer}};
}

CheckpointMeta meta_from_json(const json& j) {
  CheckpointMeta m;
  m.profile = j.at("profile");
  m.variant = j.at("variant");
  m.audio_in_channels = j.at("audio_in_channels");
  m.config_hash = j.at("config_hash");
  m.dataset_hash = j.at("dataset_hash");
  m.pool_lo = j.at("pool_lo");
  m.pool_hi = j.at("pool_hi");
  m.step = j.at("step");
  m.has_optimizer = j.at("has_optimizer");
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, Network<float>& net, nn::Adam<float>* opt,
                     const CheckpointMeta& meta_in) {
  CheckpointMeta meta = meta_in;
  meta.has_optimizer = opt != nullptr;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write(kMagic, 8);
  const std::string mj = meta_to_json(meta).dump();
  write_u32(f, static_cast<uint32_t>(mj.size()));
  write_blob(f, mj.data(), mj.size());

  auto params = net.params();
  write_u32(f, static_cast<uint32_t>(params.size()));
  for (auto* p : params) {
    write_u32(f, static_cast<uint32_t>(p->name.size()));
    write_blob(f, p->name.data(), p->name.size());
    write_u32(f, static_cast<uint32_t>(p->value.rank()));
    for (size_t d = 0; d < p->value.rank(); ++d) {
      const int64_t dim = p->value.dim(d);
      write_blob(f, &dim, 8);
    }
    write_blob(f, p->value.data(), static_cast<size_t>(p->value.numel()) * 4);
  }
  if (opt) {
    const int64_t step = opt->step_count();
    write_blob(f, &step, 8);
    for (size_t i = 0; i < params.size(); ++i) {
      write_blob(f, opt->moment1()[i].data(), static_cast<size_t>(params[i]->value.numel()) * 4);
      write_blob(f, opt->moment2()[i].data(), static_cast<size_t>(params[i]->value.numel()) * 4);
    }
  }
}

namespace {

CheckpointMeta read_header(std::ifstream& f, const std::string& path) {
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  const uint32_t len = read_u32(f);
  std::string mj(len, '\0');
  f.read(mj.data(), len);
  return meta_from_json(json::parse(mj));
}

}  // namespace

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_checkpoint_meta: cannot open " + path);
  return read_header(f, path);
}

CheckpointMeta load_checkpoint(const std::string& path, Network<float>& net,
                               nn::Adam<float>* opt, const std::string& expected_config_hash,
                               bool force) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  const CheckpointMeta meta = read_header(f, path);
  if (!expected_config_hash.empty() && meta.config_hash != expected_config_hash && !force) {
    throw HashMismatchError("checkpoint config hash " + meta.config_hash +
                            " != expected " + expected_config_hash + " (use --force)");
  }
  auto params = net.params();
  const uint32_t count = read_u32(f);
  if (count != params.size()) {
    throw std::runtime_error("checkpoint parameter count mismatch: file " +
                             std::to_string(count) + " vs model " +
                             std::to_string(params.size()));
  }
  for (auto* p : params) {
    const uint32_t nlen = read_u32(f);
    std::string name(nlen, '\0');
    f.read(name.data(), nlen);
    if (name != p->name) {
      throw std::runtime_error("checkpoint parameter order mismatch at " + name + " vs " +
                               p->name);
    }
    const uint32_t rank = read_u32(f);
    std::vector<int64_t> dims(rank);
    for (auto& d : dims) f.read(reinterpret_cast<char*>(&d), 8);
    if (dims != p->value.shape()) {
      throw std::runtime_error("checkpoint shape mismatch at " + name);
    }
    f.read(reinterpret_cast<char*>(p->value.data()),
           static_cast<std::streamsize>(p->value.numel() * 4));
  }
  if (meta.has_optimizer && opt) {
    opt->attach(params);
    int64_t step = 0;
    f.read(reinterpret_cast<char*>(&step), 8);
    opt->set_step_count(step);
    for (size_t i = 0; i < params.size(); ++i) {
      f.read(reinterpret_cast<char*>(opt->moment1()[i].data()),
             static_cast<std::streamsize>(params[i]->value.numel() * 4));
      f.read(reinterpret_cast<char*>(opt->moment2()[i].data()),
             static_cast<std::streamsize>(params[i]->value.numel() * 4));
    }
  }
  if (!f) throw std::runtime_error("truncated checkpoint: " + path);
  return meta;
}

}  // namespace earshot::model
