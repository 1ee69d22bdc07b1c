#pragma once

#include "graph_model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tgforge::testing {

inline std::string fixture_path(const std::string &name) {
  return std::string(TGFORGE_FIXTURES) + "/" + name;
}

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline TheoryGraph load_fixture(const std::string &name) {
  return parse_graph(read_file(fixture_path(name)));
}

} // namespace tgforge::testing
