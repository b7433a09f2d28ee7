#include "stoptime/config.hpp"

#include <cstdlib>
#include <string>

namespace stoptime {

namespace {

Config make_default() {
  Config cfg;
  if (const char* env = std::getenv("STOPTIME_ENUM_CAP")) {
    try {
      int cap = std::stoi(std::string(env));
      if (cap >= 0) {
        cfg.antichain_cap = cap;
        cfg.branch_cap = cap;
      }
    } catch (...) {
      // ignore malformed values, keep defaults
    }
  }
  return cfg;
}

}  // namespace

Config& config() {
  static Config cfg = make_default();
  return cfg;
}

}  // namespace stoptime
