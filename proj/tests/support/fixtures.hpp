#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "sqpn/format.hpp"

namespace sqpn::testkit {

inline std::string fixture_path(const std::string& name) { return std::string(SQPN_FIXTURE_DIR) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(SQPN_GOLDEN_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Network load_fixture(const std::string& name) { return parse_network(slurp(fixture_path(name))); }

}  // namespace sqpn::testkit
