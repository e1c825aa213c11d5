#pragma once

#include <cstddef>
#include <vector>

namespace earshot::nn {

// Per-thread scratch buffer for im2col-style staging. Grows monotonically.
template <typename T>
inline std::vector<T>& thread_scratch(size_t min_size) {
  thread_local std::vector<T> buf;
  if (buf.size() < min_size) buf.resize(min_size);
  return buf;
}

template <typename T>
inline std::vector<T>& thread_scratch2(size_t min_size) {
  thread_local std::vector<T> buf;
  if (buf.size() < min_size) buf.resize(min_size);
  return buf;
}

}  // namespace earshot::nn
