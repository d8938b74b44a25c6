#include "pics/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pics {

namespace {

void check_dims(Eigen::Index width, Eigen::Index height) {
  if (width < kMinImageSide || height < kMinImageSide) {
    throw InvalidArgument("image must be at least 4x4, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
}

}  // namespace

GrayImage::GrayImage(Eigen::Index width, Eigen::Index height, double fill)
    : GrayImage(ImageArray::Constant(height, width, fill)) {}

GrayImage::GrayImage(ImageArray pixels) : pixels_(std::move(pixels)) {
  check_dims(pixels_.cols(), pixels_.rows());
  if (!pixels_.allFinite() || (pixels_ < 0.0).any() || (pixels_ > 1.0).any()) {
    throw InvalidArgument("image intensities must lie in [0, 1]");
  }
}

Mask::Mask(Eigen::Index width, Eigen::Index height)
    : cells_(MaskArray::Zero(height, width)) {}

Mask::Mask(MaskArray cells) : cells_(std::move(cells)) {
  cells_ = (cells_ != 0).cast<std::uint8_t>();
}

std::int64_t Mask::count() const { return cells_.cast<std::int64_t>().sum(); }

Mask rasterize_mask(const Polygon& polygon, Eigen::Index width, Eigen::Index height) {
  Mask mask(width, height);
  const Eigen::Index n = polygon.rows();
  if (n < 3) throw InvalidArgument("polygon needs at least 3 points");

  const double ymin = polygon.col(1).minCoeff();
  const double ymax = polygon.col(1).maxCoeff();
  const auto q_begin = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(ymin - 0.5)));
  const auto q_end =
      std::min<Eigen::Index>(height, static_cast<Eigen::Index>(std::ceil(ymax - 0.5)) + 1);

  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index q = q_begin; q < q_end; ++q) {
    const double y = static_cast<double>(q) + 0.5;
    xs.clear();
    for (Eigen::Index i = 0, j = n - 1; i < n; j = i++) {
      const double yi = polygon(i, 1);
      const double yj = polygon(j, 1);
      // Half-open crossing rule: a vertex exactly on the scanline counts once.
      if ((yi > y) != (yj > y)) {
        const double xi = polygon(i, 0);
        const double xj = polygon(j, 0);
        xs.push_back((xj - xi) * (y - yi) / (yj - yi) + xi);
      }
    }
    std::sort(xs.begin(), xs.end());
    // A center x is inside iff an odd number of crossings lie strictly to its
    // right, i.e. xs[2k] <= x < xs[2k+1] for some k.
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const double left = xs[k];
      const double right = xs[k + 1];
      auto p = static_cast<Eigen::Index>(std::ceil(left - 0.5));
      while (static_cast<double>(p) + 0.5 < left) ++p;
      while (static_cast<double>(p - 1) + 0.5 >= left) --p;
      p = std::max<Eigen::Index>(p, 0);
      for (; p < width && static_cast<double>(p) + 0.5 < right; ++p) mask.set(p, q, true);
    }
  }
  return mask;
}

GradField image_gradient(const GrayImage& image) {
  const ImageArray& img = image.pixels();
  const Eigen::Index rows = img.rows();
  const Eigen::Index cols = img.cols();
  GradField out(rows, cols);
  for (Eigen::Index q = 0; q < rows; ++q) {
    for (Eigen::Index p = 0; p < cols; ++p) {
      double gx;
      if (p == 0) {
        gx = img(q, 1) - img(q, 0);
      } else if (p == cols - 1) {
        gx = img(q, p) - img(q, p - 1);
      } else {
        gx = 0.5 * (img(q, p + 1) - img(q, p - 1));
      }
      double gy;
      if (q == 0) {
        gy = img(1, p) - img(0, p);
      } else if (q == rows - 1) {
        gy = img(q, p) - img(q - 1, p);
      } else {
        gy = 0.5 * (img(q + 1, p) - img(q - 1, p));
      }
      out(q, p) = gx * gx + gy * gy;
    }
  }
  return out;
}

RegionStats region_means(const GrayImage& image, const Mask& mask) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw DimensionMismatch("mask and image dimensions differ");
  }
  const ImageArray& img = image.pixels();
  const MaskArray& cells = mask.cells();
  double sum_in = 0.0;
  double sum_out = 0.0;
  std::int64_t n_in = 0;
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    if (cells.data()[i]) {
      sum_in += img.data()[i];
      ++n_in;
    } else {
      sum_out += img.data()[i];
    }
  }
  RegionStats stats;
  stats.count_in = n_in;
  stats.count_out = static_cast<std::int64_t>(img.size()) - n_in;
  stats.mean_in = n_in > 0 ? sum_in / static_cast<double>(n_in) : 0.0;
  stats.mean_out = stats.count_out > 0 ? sum_out / static_cast<double>(stats.count_out) : 0.0;
  return stats;
}

double polygon_area(const Polygon& polygon) {
  const Eigen::Index n = polygon.rows();
  double twice = 0.0;
  for (Eigen::Index i = 0, j = n - 1; i < n; j = i++) {
    twice += polygon(j, 0) * polygon(i, 1) - polygon(i, 0) * polygon(j, 1);
  }
  return 0.5 * twice;
}

}  // namespace pics
