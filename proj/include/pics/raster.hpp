#pragma once

// Pixel grids. Pixel (p, q) covers [p, p+1) x [q, q+1) in the continuous
// frame the knots live in; its center is (p + 0.5, q + 0.5). Arrays are stored
// row-major with row index q and column index p.

#include <Eigen/Core>

#include <cstdint>

#include "pics/spline.hpp"

namespace pics {

using ImageArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr Eigen::Index kMinImageSide = 4;

/// Grayscale image with intensities normalized to [0, 1].
class GrayImage {
 public:
  GrayImage(Eigen::Index width, Eigen::Index height, double fill = 0.0);
  explicit GrayImage(ImageArray pixels);

  Eigen::Index width() const { return pixels_.cols(); }
  Eigen::Index height() const { return pixels_.rows(); }
  double operator()(Eigen::Index p, Eigen::Index q) const { return pixels_(q, p); }
  const ImageArray& pixels() const { return pixels_; }

  friend bool operator==(const GrayImage& a, const GrayImage& b) {
    return a.pixels_.rows() == b.pixels_.rows() && a.pixels_.cols() == b.pixels_.cols() &&
           (a.pixels_ == b.pixels_).all();
  }

 private:
  ImageArray pixels_;
};

/// Binary occupancy grid (0 outside, 1 inside).
class Mask {
 public:
  Mask(Eigen::Index width, Eigen::Index height);
  explicit Mask(MaskArray cells);

  Eigen::Index width() const { return cells_.cols(); }
  Eigen::Index height() const { return cells_.rows(); }
  bool operator()(Eigen::Index p, Eigen::Index q) const { return cells_(q, p) != 0; }
  void set(Eigen::Index p, Eigen::Index q, bool inside) { cells_(q, p) = inside ? 1 : 0; }
  const MaskArray& cells() const { return cells_; }
  std::int64_t count() const;

  friend bool operator==(const Mask& a, const Mask& b) {
    return a.cells_.rows() == b.cells_.rows() && a.cells_.cols() == b.cells_.cols() &&
           (a.cells_ == b.cells_).all();
  }

 private:
  MaskArray cells_;
};

/// Squared gradient magnitude |grad I|^2 per pixel.
using GradField = ImageArray;

struct RegionStats {
  double mean_in = 0.0;
  double mean_out = 0.0;
  std::int64_t count_in = 0;
  std::int64_t count_out = 0;
};

/// Even-odd fill sampled at pixel centers. Parts of the polygon outside the
/// grid simply produce no pixels.
Mask rasterize_mask(const Polygon& polygon, Eigen::Index width, Eigen::Index height);

/// Central differences inside, one-sided differences on the border.
GradField image_gradient(const GrayImage& image);

/// Empty regions report mean 0 and count 0.
RegionStats region_means(const GrayImage& image, const Mask& mask);

/// Shoelace area of a closed polyline (signed, positive for counter-clockwise
/// order in the (u, v) frame).
double polygon_area(const Polygon& polygon);

}  // namespace pics
