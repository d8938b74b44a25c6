#pragma once

// Independent reference implementations used to check the library. They
// favour directness over speed: dense solves, per-pixel loops, no shared
// code with src/.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// Coefficients (a, b, c, d) per segment of y(t) = a t^3 + b t^2 + c t + d,
// t in [0, 1/N], from the full 4N x 4N interpolation/C1/C2/periodicity system.
inline Eigen::MatrixXd dense_coeffs(const Eigen::VectorXd& y) {
  const int n = static_cast<int>(y.size());
  const double h = 1.0 / n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(4 * n);
  int row = 0;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const int ci = 4 * i, cj = 4 * j;
    // y_i(0) = y_i
    a(row, ci + 3) = 1.0;
    rhs(row++) = y(i);
    // y_i(h) = y_{i+1}
    a(row, ci) = h * h * h;
    a(row, ci + 1) = h * h;
    a(row, ci + 2) = h;
    a(row, ci + 3) = 1.0;
    rhs(row++) = y(j);
    // y_i'(h) = y_{i+1}'(0)
    a(row, ci) = 3 * h * h;
    a(row, ci + 1) = 2 * h;
    a(row, ci + 2) = 1.0;
    a(row, cj + 2) = -1.0;
    ++row;
    // y_i''(h) = y_{i+1}''(0)
    a(row, ci) = 6 * h;
    a(row, ci + 1) = 2.0;
    a(row, cj + 1) = -2.0;
    ++row;
  }
  const Eigen::VectorXd x = a.fullPivLu().solve(rhs);
  Eigen::MatrixXd out(n, 4);
  for (int i = 0; i < n; ++i) out.row(i) = x.segment<4>(4 * i).transpose();
  return out;
}

struct DenseSpline {
  Eigen::MatrixXd u, v;
  int n() const { return static_cast<int>(u.rows()); }
};

inline DenseSpline dense_fit(const Points& pts) {
  return {dense_coeffs(pts.col(0)), dense_coeffs(pts.col(1))};
}

inline Eigen::Vector2d dense_eval(const DenseSpline& sp, double s) {
  const int n = sp.n();
  s -= std::floor(s);
  int i = static_cast<int>(std::floor(s * n));
  if (i >= n) i = n - 1;
  const double t = s - static_cast<double>(i) / n;
  auto poly = [t](const Eigen::MatrixXd& c, int k) {
    return ((c(k, 0) * t + c(k, 1)) * t + c(k, 2)) * t + c(k, 3);
  };
  return {poly(sp.u, i), poly(sp.v, i)};
}

// Linear maps from knot coordinates to first / second derivatives at the
// knots, built column by column from unit-vector solves.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> knot_derivative_maps(int n) {
  Eigen::MatrixXd d1(n, n), d2(n, n);
  for (int j = 0; j < n; ++j) {
    const Eigen::MatrixXd c = dense_coeffs(Eigen::VectorXd::Unit(n, j));
    d1.col(j) = c.col(2);
    d2.col(j) = 2.0 * c.col(1);
  }
  return {d1, d2};
}

// Gradient of alpha*mean|psi_s|^2 + beta*mean|psi_ss|^2 over the knots, in
// the flat [u0, v0, u1, v1, ...] layout.
inline Eigen::VectorXd internal_energy_gradient(const Points& pts, double alpha, double beta) {
  const int n = static_cast<int>(pts.rows());
  const auto [d1, d2] = knot_derivative_maps(n);
  const Eigen::MatrixXd h = (2.0 / n) * (alpha * d1.transpose() * d1 + beta * d2.transpose() * d2);
  const Eigen::VectorXd gu = h * pts.col(0);
  const Eigen::VectorXd gv = h * pts.col(1);
  Eigen::VectorXd out(2 * n);
  for (int i = 0; i < n; ++i) {
    out(2 * i) = gu(i);
    out(2 * i + 1) = gv(i);
  }
  return out;
}

// Even-odd test with a ray cast towards -v (upwards), counting edges whose
// u-range straddles the point.
inline bool inside_even_odd(const Points& poly, double x, double y) {
  const int n = static_cast<int>(poly.rows());
  int crossings = 0;
  for (int i = 0; i < n; ++i) {
    const double x0 = poly(i, 0), y0 = poly(i, 1);
    const double x1 = poly((i + 1) % n, 0), y1 = poly((i + 1) % n, 1);
    if ((x0 <= x) == (x1 <= x)) continue;
    const double t = (x - x0) / (x1 - x0);
    const double yc = y0 + t * (y1 - y0);
    if (yc < y) ++crossings;
  }
  return crossings % 2 == 1;
}

// Row-major (q, p) occupancy, pixel centres at +0.5.
inline Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> brute_mask(const Points& poly, int w,
                                                                     int h) {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> m(h, w);
  for (int q = 0; q < h; ++q)
    for (int p = 0; p < w; ++p) m(q, p) = inside_even_odd(poly, p + 0.5, q + 0.5);
  return m;
}

// |grad I|^2, central differences inside, one-sided at the borders.
inline Eigen::ArrayXXd brute_gradient(const Eigen::ArrayXXd& img) {
  const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
  Eigen::ArrayXXd g(h, w);
  for (int q = 0; q < h; ++q) {
    for (int p = 0; p < w; ++p) {
      double gx, gy;
      if (p == 0) gx = img(q, 1) - img(q, 0);
      else if (p == w - 1) gx = img(q, w - 1) - img(q, w - 2);
      else gx = 0.5 * (img(q, p + 1) - img(q, p - 1));
      if (q == 0) gy = img(1, p) - img(0, p);
      else if (q == h - 1) gy = img(h - 1, p) - img(h - 2, p);
      else gy = 0.5 * (img(q + 1, p) - img(q - 1, p));
      g(q, p) = gx * gx + gy * gy;
    }
  }
  return g;
}

inline double brute_chan_vese(const Eigen::ArrayXXd& img,
                              const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& chi,
                              double gamma) {
  double sum_in = 0, sum_out = 0;
  int n_in = 0, n_out = 0;
  for (int q = 0; q < img.rows(); ++q)
    for (int p = 0; p < img.cols(); ++p) {
      if (chi(q, p)) {
        sum_in += img(q, p);
        ++n_in;
      } else {
        sum_out += img(q, p);
        ++n_out;
      }
    }
  const double mu_in = n_in ? sum_in / n_in : 0.0;
  const double mu_out = n_out ? sum_out / n_out : 0.0;
  const Eigen::ArrayXXd g = brute_gradient(img);
  double total = 0;
  for (int q = 0; q < img.rows(); ++q)
    for (int p = 0; p < img.cols(); ++p) {
      const double c = chi(q, p) ? 1.0 : 0.0;
      const double a = (img(q, p) - mu_in) * c;
      const double b = std::sqrt(g(q, p)) * c;
      const double o = (img(q, p) - mu_out) * (1.0 - c);
      total += a * a + gamma * b * b + o * o;
    }
  return total;
}

// Random star-shaped polygon: sorted angles, radii in [rmin, rmax].
inline Points random_star(std::mt19937_64& rng, int n, double cx, double cy, double rmin,
                          double rmax) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> radius(rmin, rmax);
  std::vector<double> th(n);
  for (auto& t : th) t = angle(rng);
  std::sort(th.begin(), th.end());
  Points pts(n, 2);
  for (int i = 0; i < n; ++i) {
    const double r = radius(rng);
    pts(i, 0) = cx + r * std::cos(th[i]);
    pts(i, 1) = cy + r * std::sin(th[i]);
  }
  return pts;
}

inline Points circle(int n, double cx, double cy, double r) {
  Points pts(n, 2);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n;
    pts(i, 0) = cx + r * std::cos(th);
    pts(i, 1) = cy + r * std::sin(th);
  }
  return pts;
}

}  // namespace oracle
