#include "goalex/image_io.hpp"

#include <fstream>

#include "goalex/tensor.hpp"

namespace goalex {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  return f;
}

}  // namespace

void write_pgm(const std::string& path, int h, int w, const std::vector<uint16_t>& pixels,
               uint16_t maxval) {
  if (static_cast<int64_t>(pixels.size()) != static_cast<int64_t>(h) * w) {
    throw ConfigError("write_pgm: pixel count does not match dimensions");
  }
  auto f = open_out(path);
  f << "P5\n" << w << " " << h << "\n" << maxval << "\n";
  if (maxval > 255) {
    for (uint16_t v : pixels) {
      const unsigned char hi = static_cast<unsigned char>(v >> 8);
      const unsigned char lo = static_cast<unsigned char>(v & 0xff);
      f.put(static_cast<char>(hi));
      f.put(static_cast<char>(lo));
    }
  } else {
    for (uint16_t v : pixels) f.put(static_cast<char>(v & 0xff));
  }
}

void write_observation(const std::string& path, const Observation& obs) {
  auto f = open_out(path);
  if (obs.dims.c == 1) {
    f << "P5\n" << obs.dims.w << " " << obs.dims.h << "\n255\n";
  } else if (obs.dims.c == 3) {
    f << "P6\n" << obs.dims.w << " " << obs.dims.h << "\n255\n";
  } else {
    throw ConfigError("write_observation: unsupported channel count");
  }
  f.write(reinterpret_cast<const char*>(obs.data.data()),
          static_cast<std::streamsize>(obs.data.size()));
}

}  // namespace goalex
