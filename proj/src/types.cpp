#include "shield/types.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <stdexcept>

namespace shield {
namespace {
const std::array<std::string, 3> kAxisNames{"cost", "carbon", "water"};
}

ObjectiveMask ObjectiveMask::parse(const std::string& text) {
  std::vector<int> axes;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto it = std::find(kAxisNames.begin(), kAxisNames.end(), token);
    if (it == kAxisNames.end()) {
      throw std::invalid_argument("unknown objective '" + token + "'");
    }
    const int axis = static_cast<int>(it - kAxisNames.begin());
    if (std::find(axes.begin(), axes.end(), axis) != axes.end()) {
      throw std::invalid_argument("objective '" + token + "' repeated");
    }
    axes.push_back(axis);
  }
  if (axes.empty()) throw std::invalid_argument("empty objective list");
  return ObjectiveMask(std::move(axes));
}

std::string ObjectiveMask::name() const {
  std::string out;
  for (int a : axes_) {
    if (!out.empty()) out += ',';
    out += kAxisNames[a];
  }
  return out;
}

}  // namespace shield
