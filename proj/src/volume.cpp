#include "pics/volume.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pics {

ImageStack::ImageStack(std::vector<GrayImage> slices, std::optional<double> spacing)
    : slices_(std::move(slices)), spacing_(spacing) {
  if (slices_.empty()) throw InvalidArgument("image stack needs at least one slice");
  for (std::size_t i = 1; i < slices_.size(); ++i) {
    if (slices_[i].width() != slices_[0].width() || slices_[i].height() != slices_[0].height()) {
      throw DimensionMismatch("slice " + std::to_string(i) + " differs in size from slice 0");
    }
  }
}

Knots init_from_click(const Point& click, double radius, int n_knots, double width,
                      double height) {
  if (!(radius > 0.0)) throw InvalidArgument("init radius must be positive");
  if (!click.allFinite()) throw OutOfBounds("click must be finite");
  if (width > 0.0 && height > 0.0 &&
      (click.x() < 0.0 || click.x() >= width || click.y() < 0.0 || click.y() >= height)) {
    throw OutOfBounds("click lies outside the image");
  }
  if (n_knots < kMinKnots) {
    throw TooFewKnots("need at least " + std::to_string(kMinKnots) + " knots, got " +
                      std::to_string(n_knots));
  }
  Knots::PointsType pts(n_knots, 2);
  for (int k = 0; k < n_knots; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n_knots;
    pts(k, 0) = click.x() + radius * std::cos(angle);
    pts(k, 1) = click.y() + radius * std::sin(angle);
  }
  return Knots(std::move(pts));
}

double iou(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionMismatch("masks differ in size");
  }
  const auto ia = a.cells() != 0;
  const auto ib = b.cells() != 0;
  const auto inter = (ia && ib).count();
  const auto uni = (ia || ib).count();
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

SliceResult segment_slice(const GrayImage& image, const Knots& init, const Hyperparameters& hyper,
                          const IterationObserver& observer, const Mask* reference, int threads) {
  ContourOptimizer opt(image, init, hyper, threads);
  const StopReason reason = opt.run(observer);
  const auto& trace = opt.trace();
  const Spline spline = fit_periodic_spline(opt.knots());
  const Polygon polygon = sample_polygon(spline, hyper.samples_per_segment);

  SliceResult out{opt.knots(),
                  rasterize_mask(polygon, image.width(), image.height()),
                  static_cast<int>(trace.size()),
                  trace.initial_loss,
                  trace.records.empty() ? trace.initial_loss : trace.records.back().loss,
                  trace.mean_opi(),
                  reason,
                  std::nullopt,
                  std::abs(polygon_area(polygon)) < kCollapsedAreaPx,
                  trace};
  if (reference) out.iou = iou(out.mask, *reference);
  return out;
}

VolumeResult segment_volume(const ImageStack& stack, const Point& click,
                            const Hyperparameters& hyper, const SliceObserver& observer,
                            const VolumeOptions& options) {
  if (!options.references.empty() && options.references.size() != stack.size()) {
    throw DimensionMismatch("reference masks must match the slice count");
  }
  VolumeResult result;
  std::optional<Knots> previous;
  for (std::size_t n = 0; n < stack.size(); ++n) {
    const Hyperparameters& h = (n < options.per_slice.size() && options.per_slice[n])
                                   ? *options.per_slice[n]
                                   : hyper;
    try {
      const Knots init = previous ? *previous
                                  : init_from_click(click, h.init_radius, h.n_knots,
                                                    static_cast<double>(stack.width()),
                                                    static_cast<double>(stack.height()));
      IterationObserver slice_observer;
      if (observer) {
        slice_observer = [&observer, n](const IterationRecord& r, const Knots& k) {
          observer(n, r, k);
        };
      }
      const Mask* ref = options.references.empty() ? nullptr : &options.references[n];
      result.slices.push_back(segment_slice(stack[n], init, h, slice_observer, ref, options.threads));
      previous = result.slices.back().knots;
    } catch (const Error& e) {
      throw Error(e.code(), "slice " + std::to_string(n) + ": " + e.what());
    }
  }
  return result;
}

}  // namespace pics
