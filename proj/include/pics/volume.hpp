#pragma once

#include <optional>
#include <vector>

#include "pics/optimizer.hpp"

namespace pics {

/// Ordered slices sharing one size.
class ImageStack {
 public:
  explicit ImageStack(std::vector<GrayImage> slices, std::optional<double> spacing = {});

  std::size_t size() const { return slices_.size(); }
  const GrayImage& operator[](std::size_t i) const { return slices_[i]; }
  const std::vector<GrayImage>& slices() const { return slices_; }
  Eigen::Index width() const { return slices_.front().width(); }
  Eigen::Index height() const { return slices_.front().height(); }
  std::optional<double> spacing() const { return spacing_; }

 private:
  std::vector<GrayImage> slices_;
  std::optional<double> spacing_;
};

/// Polygon area (px^2) under which a slice is flagged as a likely topology break.
inline constexpr double kCollapsedAreaPx = 4.0;

struct SliceResult {
  Knots knots;
  Mask mask;
  int iterations = 0;
  LossBreakdown initial_loss;
  LossBreakdown final_loss;
  double mean_opi = 0.0;
  StopReason reason = StopReason::None;
  std::optional<double> iou;
  bool collapsed = false;
  OptimizationTrace trace;
};

struct VolumeResult {
  std::vector<SliceResult> slices;
};

/// `n_knots` points on a circle around `click`, counter-clockwise in the
/// (u, v) frame, first knot at angle 0. When `width`/`height` are positive the
/// click must lie inside [0, width) x [0, height), else OutOfBounds.
Knots init_from_click(const Point& click, double radius, int n_knots, double width = 0.0,
                      double height = 0.0);

/// |A n B| / |A u B|; 1 when both masks are empty.
double iou(const Mask& a, const Mask& b);

using SliceObserver = std::function<void(std::size_t slice, const IterationRecord&, const Knots&)>;

struct VolumeOptions {
  /// Per-slice hyperparameter overrides; missing entries use the run default.
  std::vector<std::optional<Hyperparameters>> per_slice;
  /// Optional reference masks for IoU, one per slice when non-empty.
  std::vector<Mask> references;
  int threads = default_thread_count();
};

/// Slice 0 starts from the click; every later slice starts from the previous
/// slice's optimized knots. Errors are rethrown with the slice index attached.
VolumeResult segment_volume(const ImageStack& stack, const Point& click,
                            const Hyperparameters& hyper, const SliceObserver& observer = {},
                            const VolumeOptions& options = {});

/// Optimizes one slice from `init` and packages the result.
SliceResult segment_slice(const GrayImage& image, const Knots& init, const Hyperparameters& hyper,
                          const IterationObserver& observer = {},
                          const Mask* reference = nullptr, int threads = default_thread_count());

}  // namespace pics
