#ifndef FERMIDYN_ERRORS_HPP
#define FERMIDYN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fermidyn {

// Exit-code taxonomy used by the CLI: 2 = config, 3 = numerical invariant
// violation, 4 = resource cap.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericsError : std::runtime_error {
  explicit NumericsError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ResourceCapError : std::runtime_error {
  explicit ResourceCapError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fermidyn

#endif
