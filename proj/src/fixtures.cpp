#include "pics/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace pics {

namespace {

using Inside = std::function<bool(double, double)>;
using Level = std::function<double(double, double, bool)>;

Fixture render(const FixtureOptions& options, const Inside& inside, const Level& level = {}) {
  const Eigen::Index n = options.size;
  ImageArray pixels(n, n);
  MaskArray truth(n, n);
  for (Eigen::Index q = 0; q < n; ++q) {
    for (Eigen::Index p = 0; p < n; ++p) {
      const double x = static_cast<double>(p) + 0.5;
      const double y = static_cast<double>(q) + 0.5;
      const bool in = inside(x, y);
      pixels(q, p) = level ? level(x, y, in) : (in ? 1.0 : 0.0);
      truth(q, p) = in ? 1 : 0;
    }
  }
  if (options.noise > 0.0) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, options.noise);
    for (Eigen::Index i = 0; i < pixels.size(); ++i) {
      pixels.data()[i] = std::clamp(pixels.data()[i] + gauss(rng), 0.0, 1.0);
    }
  }
  return {GrayImage(std::move(pixels)), Mask(std::move(truth)), std::nullopt};
}

Inside disk_predicate(const Point& c, double r) {
  return [c, r](double x, double y) { return std::hypot(x - c.x(), y - c.y()) <= r; };
}

void check_size(const FixtureOptions& options) {
  if (options.size < 16) throw InvalidArgument("fixture size must be at least 16");
  if (options.noise < 0.0) throw InvalidArgument("noise level must be non-negative");
}

}  // namespace

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names{"disk", "distorted-disk", "cavity",
                                              "translating-stack"};
  return names;
}

FixtureGeometry disk_geometry(Eigen::Index size) {
  const double half = static_cast<double>(size) / 2.0;
  return {{half, half}, 0.3125 * static_cast<double>(size)};
}

Fixture disk_fixture(const FixtureOptions& options) {
  check_size(options);
  const auto g = disk_geometry(options.size);
  return render(options, disk_predicate(g.center, g.radius));
}

Fixture distorted_disk_fixture(const FixtureOptions& options) {
  check_size(options);
  if (!(options.bite_depth >= 0.0 && options.bite_depth < 1.0) ||
      !(options.bite_arc_deg > 0.0 && options.bite_arc_deg < 360.0) ||
      !(options.bite_level >= 0.0 && options.bite_level <= 1.0)) {
    throw InvalidArgument("bite depth must be in [0,1), arc in (0,360) deg, level in [0,1]");
  }
  const auto g = disk_geometry(options.size);
  const double half_arc = options.bite_arc_deg * std::numbers::pi / 360.0;
  const double depth = options.bite_depth;
  const Point c = g.center;
  const double r = g.radius;
  const Inside disk = disk_predicate(c, r);
  const Inside bitten = [c, r, half_arc, depth](double x, double y) {
    const double theta = std::atan2(y - c.y(), x - c.x());
    double boundary = r;
    if (std::abs(theta) < half_arc) {
      // Half-period sine: zero at the arc ends, full depth at its centre.
      const double phase = (theta + half_arc) / (2.0 * half_arc);
      boundary = r * (1.0 - depth * std::sin(std::numbers::pi * phase));
    }
    return std::hypot(x - c.x(), y - c.y()) <= boundary;
  };
  const double bite_level = options.bite_level;
  Fixture out = render(options, bitten, [&](double x, double y, bool in) {
    if (in) return 1.0;
    return disk(x, y) ? bite_level : 0.0;
  });
  FixtureOptions clean = options;
  clean.noise = 0.0;
  out.reference = render(clean, disk).truth;
  return out;
}

Point cavity_seed(Eigen::Index size) {
  const double s = static_cast<double>(size) / 128.0;
  return {64.0 * s, 92.0 * s};
}

Fixture cavity_fixture(const FixtureOptions& options) {
  check_size(options);
  // U shape: an 80x80 block with a 32 px wide, 40 px deep notch cut from the
  // top edge (dimensions for a 128 px image, scaled with size).
  const double s = static_cast<double>(options.size) / 128.0;
  const double x0 = 24 * s, x1 = 104 * s, y0 = 24 * s, y1 = 104 * s;
  const double nx0 = 48 * s, nx1 = 80 * s, ny1 = 64 * s;
  return render(options, [=](double x, double y) {
    const bool block = x >= x0 && x < x1 && y >= y0 && y < y1;
    const bool notch = x >= nx0 && x < nx1 && y < ny1;
    return block && !notch;
  });
}

std::vector<Fixture> translating_stack_fixture(const FixtureOptions& options) {
  check_size(options);
  if (options.slices < 1) throw InvalidArgument("stack needs at least one slice");
  const auto g = disk_geometry(options.size);
  std::vector<Fixture> out;
  for (int n = 0; n < options.slices; ++n) {
    FixtureOptions slice = options;
    slice.seed = options.seed + static_cast<std::uint64_t>(n);
    const Point c = g.center + Point(options.shift * n, 0.0);
    out.push_back(render(slice, disk_predicate(c, g.radius)));
  }
  return out;
}

Fixture make_fixture(const std::string& name, const FixtureOptions& options) {
  if (name == "disk") return disk_fixture(options);
  if (name == "distorted-disk") return distorted_disk_fixture(options);
  if (name == "cavity") return cavity_fixture(options);
  throw UnknownFixture("unknown single-image fixture '" + name + "'");
}

std::vector<Fixture> make_fixture_stack(const std::string& name, const FixtureOptions& options) {
  if (name == "translating-stack") return translating_stack_fixture(options);
  return {make_fixture(name, options)};
}

}  // namespace pics
