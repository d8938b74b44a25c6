#include "pics/energy.hpp"

#include <string>

namespace pics {

void Hyperparameters::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("hyperparameter out of range: ") + what);
  };
  require(alpha >= 0.0, "alpha >= 0");
  require(beta >= 0.0, "beta >= 0");
  require(mu >= 0.0, "mu >= 0");
  require(gamma >= 0.0, "gamma >= 0");
  require(sigma >= 0.0, "sigma >= 0");
  require(learning_rate > 0.0, "learning_rate > 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "0 <= adam_beta1 < 1");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "0 <= adam_beta2 < 1");
  require(adam_eps > 0.0, "adam_eps > 0");
  require(max_iters >= 0, "max_iters >= 0");
  require(fd_step > 0.0, "fd_step > 0");
  require(opi_window >= 2, "opi_window >= 2");
  require(mu_cap_ratio > 1.0, "mu_cap_ratio > 1");
  require(samples_per_segment >= 2, "samples_per_segment >= 2");
  require(init_radius > 0.0, "init_radius > 0");
  require(n_knots >= kMinKnots, "n_knots >= 4");
  require(stall_displacement >= 0.0, "stall_displacement >= 0");
  require(stall_iters >= 1, "stall_iters >= 1");
  require(plateau_iters >= 0, "plateau_iters >= 0");
  require(plateau_rel_tol >= 0.0, "plateau_rel_tol >= 0");
  require(snapshot_every >= 0, "snapshot_every >= 0");
}

std::pair<double, double> internal_energy(const Spline& spline) {
  double first = 0.0;
  double second = 0.0;
  for (const auto& d : knot_derivatives(spline)) {
    first += d.first.squaredNorm();
    second += d.second.squaredNorm();
  }
  const auto n = static_cast<double>(spline.segments());
  return {first / n, second / n};
}

double chan_vese_energy(const GrayImage& image, const GradField& grad, const Mask& mask,
                        double gamma) {
  if (grad.rows() != image.height() || grad.cols() != image.width()) {
    throw DimensionMismatch("gradient field and image dimensions differ");
  }
  const RegionStats stats = region_means(image, mask);
  const double* img = image.pixels().data();
  const double* g = grad.data();
  const std::uint8_t* chi = mask.cells().data();
  const Eigen::Index count = image.pixels().size();

  double inside = 0.0;
  double outside = 0.0;
  double gradient = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (chi[i]) {
      const double r = img[i] - stats.mean_in;
      inside += r * r;
      gradient += g[i];
    } else {
      const double r = img[i] - stats.mean_out;
      outside += r * r;
    }
  }
  return inside + gamma * gradient + outside;
}

double shape_penalty(const Spline& spline) {
  const auto kappa = curvature_at_knots(spline);
  return kappa.squaredNorm() / static_cast<double>(kappa.size());
}

LossBreakdown assemble_loss(double j_psi_s, double j_psi_ss, double j_cv, double curv_penalty,
                            const Hyperparameters& hyper) {
  LossBreakdown out;
  out.j_psi_s = j_psi_s;
  out.j_psi_ss = j_psi_ss;
  out.j_cv = j_cv;
  out.curv_penalty = curv_penalty;
  out.j_int = hyper.alpha * j_psi_s + hyper.beta * j_psi_ss;
  out.j_ext = hyper.mu * j_cv;
  out.j_shape = hyper.sigma * curv_penalty;
  out.j_total = out.j_int + out.j_ext + out.j_shape;
  return out;
}

Mask contour_mask(const Knots& knots, Eigen::Index width, Eigen::Index height,
                  int samples_per_segment) {
  const Spline spline = fit_periodic_spline(knots);
  return rasterize_mask(sample_polygon(spline, samples_per_segment), width, height);
}

LossBreakdown total_loss(const GrayImage& image, const GradField& grad, const Knots& knots,
                         const Hyperparameters& hyper) {
  const Spline spline = fit_periodic_spline(knots);
  const auto [j_psi_s, j_psi_ss] = internal_energy(spline);
  const double curv = shape_penalty(spline);
  const Mask mask = rasterize_mask(sample_polygon(spline, hyper.samples_per_segment),
                                   image.width(), image.height());
  const double j_cv = chan_vese_energy(image, grad, mask, hyper.gamma);
  return assemble_loss(j_psi_s, j_psi_ss, j_cv, curv, hyper);
}

}  // namespace pics
