#pragma once

// Deterministic synthetic test images with analytic ground truth.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pics/raster.hpp"

namespace pics {

struct FixtureOptions {
  Eigen::Index size = 128;
  double noise = 0.0;  ///< standard deviation of additive Gaussian noise
  std::uint64_t seed = 1;
  int slices = 5;      ///< translating-stack only
  double shift = 2.0;  ///< translating-stack: px per slice along +u
  double bite_depth = 0.2;     ///< distorted-disk: bite depth as a fraction of the radius
  double bite_arc_deg = 60.0;  ///< distorted-disk: arc the bite spans, centred on +u
  double bite_level = 0.0;     ///< distorted-disk: intensity inside the bite
};

struct Fixture {
  GrayImage image;
  Mask truth;
  /// Undistorted disk the distorted-disk fixture was derived from.
  std::optional<Mask> reference;
};

struct FixtureGeometry {
  Point center;
  double radius;
};

/// Names accepted by make_fixture / make_fixture_stack.
const std::vector<std::string>& fixture_names();

/// Disk geometry used by the disk fixtures for a given image size.
FixtureGeometry disk_geometry(Eigen::Index size);

Fixture disk_fixture(const FixtureOptions& options);
Fixture distorted_disk_fixture(const FixtureOptions& options);
Fixture cavity_fixture(const FixtureOptions& options);
/// One fixture per slice: a disk translating by `shift` px per slice.
std::vector<Fixture> translating_stack_fixture(const FixtureOptions& options);

/// Point inside the cavity fixture's foreground, used as the default click.
Point cavity_seed(Eigen::Index size);

/// Single-image fixtures (disk, distorted-disk, cavity). Throws UnknownFixture.
Fixture make_fixture(const std::string& name, const FixtureOptions& options);
/// Any fixture as a list of slices (single-image fixtures give one slice).
std::vector<Fixture> make_fixture_stack(const std::string& name, const FixtureOptions& options);

}  // namespace pics
