#pragma once

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "clognet/dsl.hpp"

namespace testing_support {

using namespace clognet;

inline std::string fixture_path(const std::string& name) {
  return std::string(CLOGNET_FIXTURE_DIR) + "/" + name;
}

inline std::string golden_path(const std::string& name) {
  return std::string(CLOGNET_GOLDEN_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline dsl::ProjectFile load_fixture(
    const std::vector<std::string>& names) {
  std::vector<std::string> paths;
  for (const auto& n : names) paths.push_back(fixture_path(n));
  ValidationReport report;
  auto project = dsl::parse_project(paths, report);
  if (!project) {
    std::string msg = "fixture parse failed:";
    for (const auto& e : report.entries()) msg += " " + e.message;
    throw error(msg);
  }
  return *project;
}

/// Test corpus seed; CLOGNET_SEED overrides for reproducing failures.
inline std::uint64_t corpus_seed() {
  if (const char* env = std::getenv("CLOGNET_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0xC106;
}

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t salt) : engine(corpus_seed() ^ salt) {}
  std::uint64_t below(std::uint64_t n) {
    return n == 0 ? 0 : engine() % n;
  }
  bool chance(double p) {
    return std::uniform_real_distribution<double>(0, 1)(engine) < p;
  }
  template <typename T>
  const T& pick(const std::vector<T>& xs) {
    return xs[below(xs.size())];
  }
};

}  // namespace testing_support
