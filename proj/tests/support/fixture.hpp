#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "optlab/catalog.hpp"

namespace optlab::testsupport {

inline std::string fixture_dir() { return OPTLAB_FIXTURE_DIR; }

inline std::string fixture_path(const std::string& rel) { return fixture_dir() + "/" + rel; }

inline std::string corpus_dir() { return fixture_path("corpus"); }

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string corpus_query(const std::string& stem) {
  return read_text_file(corpus_dir() + "/" + stem + ".sql");
}

// One shared load; the catalog is immutable in every test that uses it.
inline const Catalog& fixture_catalog() {
  static Catalog cat = load_catalog(fixture_path("catalog.json"));
  return cat;
}

}  // namespace optlab::testsupport
