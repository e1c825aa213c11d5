#pragma once

#include <algorithm>
#include <cstdint>

#include "earshot/nn/tensor.hpp"

namespace earshot::model {

template <typename T>
using Tensor = nn::Tensor<T>;

inline int64_t norm_groups(int64_t channels) { return std::min<int64_t>(32, channels); }

}  // namespace earshot::model
