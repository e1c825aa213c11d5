#pragma once

#include <vector>

#include "earshot/core/common.hpp"
#include "earshot/core/geom.hpp"

namespace earshot::audio {

// Microphone positions in the wearer head frame (x right, y down, z forward,
// meters). The array is rigidly attached to the head and rotates with it.
struct MicArray {
  std::vector<Vec3> positions;
  int sample_rate = kSampleRate;

  int channels() const { return static_cast<int>(positions.size()); }
};

// Six capsules on a glasses frame: temples, hinges, nose bridge. The
// geometry is a configurable default, not a measured device.
MicArray glasses_array(int channels = 6);

}  // namespace earshot::audio
