#pragma once

#include <utility>

#include "pics/raster.hpp"
#include "pics/spline.hpp"

namespace pics {

/// Loss weights plus optimizer settings. Lengths are in pixels.
struct Hyperparameters {
  double alpha = 5e-1;  ///< first-derivative (tension) weight
  double beta = 1e-2;   ///< second-derivative (bending) weight
  double mu = 1e3;      ///< region weight, adapted by the OPI monitor
  double gamma = 0.0;   ///< interior gradient weight inside the region term
  double sigma = 0.0;   ///< curvature (convexity prior) weight

  double learning_rate = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_iters = 500;
  double fd_step = 1.0;

  int opi_window = 10;
  double opi_threshold = 0.8;
  double mu_cap_ratio = 1e4;
  bool adaptive_mu = true;

  int samples_per_segment = 16;
  double init_radius = 5.0;
  int n_knots = 10;

  /// Stop once every knot moved less than `stall_displacement` for
  /// `stall_iters` consecutive iterations.
  double stall_displacement = 1e-3;
  int stall_iters = 20;
  /// Stop once the best total loss has not improved by more than
  /// `plateau_rel_tol` (relative) for `plateau_iters` iterations; 0 disables.
  int plateau_iters = 30;
  double plateau_rel_tol = 1e-3;

  /// Keep a knot snapshot in the trace every this many iterations; 0 disables.
  int snapshot_every = 0;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

/// Raw (unweighted) terms and the weighted totals of one loss evaluation.
struct LossBreakdown {
  double j_psi_s = 0.0;
  double j_psi_ss = 0.0;
  double j_cv = 0.0;
  double curv_penalty = 0.0;
  double j_int = 0.0;
  double j_ext = 0.0;
  double j_shape = 0.0;
  double j_total = 0.0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

/// Mean squared first and second derivative magnitudes over the knots.
std::pair<double, double> internal_energy(const Spline& spline);

/// Region energy with means recomputed from `mask`; `grad` holds |grad I|^2.
double chan_vese_energy(const GrayImage& image, const GradField& grad, const Mask& mask,
                        double gamma);

/// Mean squared knot curvature. Throws SingularTangent.
double shape_penalty(const Spline& spline);

/// Combines raw terms with the weights in `hyper`.
LossBreakdown assemble_loss(double j_psi_s, double j_psi_ss, double j_cv, double curv_penalty,
                            const Hyperparameters& hyper);

/// Contour mask for a knot set: fit, sample, rasterize.
Mask contour_mask(const Knots& knots, Eigen::Index width, Eigen::Index height,
                  int samples_per_segment);

/// Full pipeline: fit spline, sample polygon, rasterize, evaluate every term.
/// Zero-weight terms are still evaluated so the breakdown is always complete.
LossBreakdown total_loss(const GrayImage& image, const GradField& grad, const Knots& knots,
                         const Hyperparameters& hyper);

}  // namespace pics
