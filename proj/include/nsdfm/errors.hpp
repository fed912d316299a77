#pragma once

#include <stdexcept>
#include <string>

namespace nsdfm {

// Exit-code mapping used by the CLI: config_error -> 2, data_error -> 3,
// estimation_error -> 4.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

struct config_error : error {
  explicit config_error(const std::string& msg) : error(msg) {}
};

struct data_error : error {
  explicit data_error(const std::string& msg) : error(msg) {}
};

struct estimation_error : error {
  explicit estimation_error(const std::string& msg) : error(msg) {}
};

}  // namespace nsdfm
