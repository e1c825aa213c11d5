#include "earshot/core/hash.hpp"

#include <fstream>
#include <stdexcept>

namespace earshot {

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("hash_file: cannot open " + path);
  Fnv1a h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.update(buf, static_cast<size_t>(in.gcount()));
  }
  return h.hex();
}

}  // namespace earshot
