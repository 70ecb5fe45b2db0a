#include "goalex/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "goalex/dataset.hpp"

namespace goalex {

namespace {
constexpr char kMagic[4] = {'G', 'X', 'C', 'K'};
constexpr uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DatasetError(DatasetErrorCode::Io, "cannot write " + path);
  f.write(kMagic, 4);
  const uint32_t version = kVersion;
  f.write(reinterpret_cast<const char*>(&version), 4);
  const uint32_t count = static_cast<uint32_t>(tensors.size());
  f.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& [name, t] : tensors) {
    const uint16_t len = static_cast<uint16_t>(name.size());
    f.write(reinterpret_cast<const char*>(&len), 2);
    f.write(name.data(), len);
    const uint32_t rank = static_cast<uint32_t>(t->shape.size());
    f.write(reinterpret_cast<const char*>(&rank), 4);
    for (int d : t->shape) {
      const uint32_t v = static_cast<uint32_t>(d);
      f.write(reinterpret_cast<const char*>(&v), 4);
    }
    f.write(reinterpret_cast<const char*>(t->data.data()),
            static_cast<std::streamsize>(t->data.size() * sizeof(float)));
  }
  if (!f) throw DatasetError(DatasetErrorCode::Io, "write failed for " + path);
}

std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DatasetError(DatasetErrorCode::Io, "cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw DatasetError(DatasetErrorCode::NotADataset, path + " is not a checkpoint file");
  }
  uint32_t version = 0, count = 0;
  f.read(reinterpret_cast<char*>(&version), 4);
  if (!f || version != kVersion) {
    throw DatasetError(DatasetErrorCode::VersionMismatch, "unsupported checkpoint version");
  }
  f.read(reinterpret_cast<char*>(&count), 4);
  std::vector<std::pair<std::string, Tensor>> out;
  for (uint32_t i = 0; i < count; ++i) {
    uint16_t len = 0;
    f.read(reinterpret_cast<char*>(&len), 2);
    std::string name(len, '\0');
    f.read(name.data(), len);
    uint32_t rank = 0;
    f.read(reinterpret_cast<char*>(&rank), 4);
    std::vector<int> shape(rank);
    for (auto& d : shape) {
      uint32_t v = 0;
      f.read(reinterpret_cast<char*>(&v), 4);
      d = static_cast<int>(v);
    }
    if (!f) throw DatasetError(DatasetErrorCode::Truncated, path + " ends prematurely");
    Tensor t(shape);
    f.read(reinterpret_cast<char*>(t.data.data()),
           static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!f) throw DatasetError(DatasetErrorCode::Truncated, path + " ends prematurely");
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> named_params(const std::string& prefix,
                                                                const Network& net) {
  std::vector<std::pair<std::string, const Tensor*>> out;
  const auto params = net.params();
  for (size_t i = 0; i < params.size(); i += 2) {
    out.emplace_back(prefix + ".w" + std::to_string(i / 2), params[i]);
    out.emplace_back(prefix + ".b" + std::to_string(i / 2), params[i + 1]);
  }
  return out;
}

void load_params(Network& net, const std::string& prefix,
                 const std::vector<std::pair<std::string, Tensor>>& entries) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : entries) by_name[name] = &t;
  auto params = net.params();
  for (size_t i = 0; i < params.size(); i += 2) {
    for (const char* kind : {"w", "b"}) {
      const std::string name = prefix + "." + kind + std::to_string(i / 2);
      auto it = by_name.find(name);
      if (it == by_name.end()) {
        throw ConfigError("checkpoint is missing tensor " + name);
      }
      Tensor* dst = params[i + (kind[0] == 'b' ? 1 : 0)];
      if (!dst->same_shape(*it->second)) {
        throw ConfigError("checkpoint tensor " + name + " has the wrong shape");
      }
      dst->data = it->second->data;
    }
  }
}

}  // namespace goalex
