#include "goalex/manifest.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

#include "goalex/tensor.hpp"

namespace goalex {

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write manifest " + path);
  f << "status = " << status << "\n";
  f << "env = " << env << "\n";
  f << "method = " << method << "\n";
  f << "seed = " << seed << "\n";
  f << "code_version = " << code_version << "\n";
  f << "started_at = " << started_at << "\n";
  f << "finished_at = " << finished_at << "\n";
  f << "wall_seconds = " << wall_seconds << "\n";
  for (const auto& a : artifacts) f << "artifact = " << a << "\n";
  std::istringstream echo(config_echo.serialize());
  std::string line;
  while (std::getline(echo, line)) f << "config." << line << "\n";
}

RunManifest RunManifest::read(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open manifest " + path);
  RunManifest m;
  std::string line;
  while (std::getline(f, line)) {
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const size_t a = s.find_first_not_of(" \t");
      const size_t b = s.find_last_not_of(" \t\r");
      s = (a == std::string::npos) ? "" : s.substr(a, b - a + 1);
    };
    trim(key);
    trim(value);
    if (key == "status") m.status = value;
    else if (key == "env") m.env = value;
    else if (key == "method") m.method = value;
    else if (key == "seed") m.seed = std::stoull(value);
    else if (key == "code_version") m.code_version = value;
    else if (key == "started_at") m.started_at = value;
    else if (key == "finished_at") m.finished_at = value;
    else if (key == "wall_seconds") m.wall_seconds = std::stod(value);
    else if (key == "artifact") m.artifacts.push_back(value);
    else if (key.rfind("config.", 0) == 0) m.config_echo.set(key.substr(7), value);
  }
  return m;
}

}  // namespace goalex
