#pragma once

#include <string>
#include <utility>
#include <vector>

#include "goalex/nn.hpp"

namespace goalex {

// Named-tensor checkpoint container, same binary discipline as the dataset
// format (magic, version, exact sizes).
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors);
std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path);

// Network parameters as (prefix.w<i>, prefix.b<i>) entries.
std::vector<std::pair<std::string, const Tensor*>> named_params(const std::string& prefix,
                                                                const Network& net);
void load_params(Network& net, const std::string& prefix,
                 const std::vector<std::pair<std::string, Tensor>>& entries);

}  // namespace goalex
