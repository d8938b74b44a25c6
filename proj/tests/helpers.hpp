#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "oracles.hpp"
#include "pics/spline.hpp"

namespace testing {

inline pics::Knots knots_of(const oracle::Points& pts, std::vector<bool> pinned = {}) {
  return pics::Knots(pts, std::move(pinned));
}

/// Random valid knot set: star-shaped around a random centre inside a 128 px frame.
inline pics::Knots random_knots(std::mt19937_64& rng, int min_n = 4, int max_n = 30) {
  std::uniform_int_distribution<int> count(min_n, max_n);
  std::uniform_real_distribution<double> centre(40.0, 88.0);
  const int n = count(rng);
  return knots_of(oracle::random_star(rng, n, centre(rng), centre(rng), 5.0, 35.0));
}

inline bool close(double a, double b, double rel, double floor = 1.0) {
  return std::abs(a - b) <= rel * std::max({floor, std::abs(a), std::abs(b)});
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pics_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
