#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace earshot {

// Minimal RGB8 PNG writer (zlib-compressed, single IDAT). Enough for the
// heatmap overlays; no interlacing, no palettes.
void write_png_rgb(const std::string& path, const uint8_t* rgb, int width, int height);

}  // namespace earshot
