#include "memu/error.hpp"

#include <cmath>
#include <stdexcept>

namespace memu {

void require_finite(double value, const char* what) {
  if (!std::isfinite(value))
    throw std::invalid_argument(std::string(what) + " is not finite");
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace memu
