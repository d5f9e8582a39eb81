#ifndef DECONFUSE_LOG_HPP_
#define DECONFUSE_LOG_HPP_

#include <cstdlib>
#include <iostream>
#include <string>

namespace deconfuse::log {

// Verbosity from DECONFUSE_LOG: 0 warnings (default), 1 info, 2 debug.
inline int level() {
  static const int lvl = [] {
    const char* env = std::getenv("DECONFUSE_LOG");
    if (env == nullptr) return 0;
    return std::atoi(env);
  }();
  return lvl;
}

inline void warn(const std::string& msg) {
  std::cerr << "warning: " << msg << "\n";
}

inline void info(const std::string& msg) {
  if (level() >= 1) std::cerr << "info: " << msg << "\n";
}

inline void debug(const std::string& msg) {
  if (level() >= 2) std::cerr << "debug: " << msg << "\n";
}

}  // namespace deconfuse::log

#endif  // DECONFUSE_LOG_HPP_
