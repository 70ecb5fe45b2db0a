#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "goalex/env.hpp"

namespace goalex {

// Portable graymap/pixmap writers for debug renders and heatmaps.
void write_pgm(const std::string& path, int h, int w, const std::vector<uint16_t>& pixels,
               uint16_t maxval);
void write_observation(const std::string& path, const Observation& obs);

}  // namespace goalex
