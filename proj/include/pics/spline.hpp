#pragma once

// Closed periodic cubic spline through an ordered set of control knots.
//
// The knots are the trainable quantities; the per-segment cubic coefficients
// are derived from them by a cyclic tridiagonal solve that enforces
// interpolation plus C1/C2 continuity at every join, including the wrap from
// the last knot back to the first. Knot k sits at parameter s_k = k / N.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pics/errors.hpp"

namespace pics {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

/// One point per row: column 0 is u (x, pixel column), column 1 is v (y, row).
template <typename Scalar>
using PointList = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

inline constexpr Eigen::Index kMinKnots = 4;
inline constexpr double kCoincidentKnotTol = 1e-9;
inline constexpr double kSingularTangentTol = 1e-12;

template <typename Scalar>
class KnotVector {
 public:
  using PointsType = PointList<Scalar>;
  using FlatType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit KnotVector(PointsType points)
      : KnotVector(std::move(points), std::vector<bool>{}) {}

  /// An empty `pinned` means every knot is free.
  KnotVector(PointsType points, std::vector<bool> pinned)
      : points_(std::move(points)), pinned_(std::move(pinned)) {
    if (pinned_.empty()) pinned_.assign(static_cast<std::size_t>(points_.rows()), false);
    validate();
  }

  /// Builds knots from the interleaved layout [u0, v0, u1, v1, ...].
  static KnotVector from_flat(const FlatType& flat, std::vector<bool> pinned = {}) {
    if (flat.size() % 2 != 0) throw InvalidArgument("flat knot vector must have even length");
    PointsType pts(flat.size() / 2, 2);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      pts(i, 0) = flat(2 * i);
      pts(i, 1) = flat(2 * i + 1);
    }
    return KnotVector(std::move(pts), std::move(pinned));
  }

  Eigen::Index size() const { return points_.rows(); }
  const PointsType& points() const { return points_; }
  Point2<Scalar> point(Eigen::Index i) const { return points_.row(i).transpose(); }
  const std::vector<bool>& pinned() const { return pinned_; }
  bool is_pinned(Eigen::Index i) const { return pinned_[static_cast<std::size_t>(i)]; }

  FlatType flat() const {
    FlatType out(2 * size());
    for (Eigen::Index i = 0; i < size(); ++i) {
      out(2 * i) = points_(i, 0);
      out(2 * i + 1) = points_(i, 1);
    }
    return out;
  }

  friend bool operator==(const KnotVector& a, const KnotVector& b) {
    return a.points_.rows() == b.points_.rows() && a.points_ == b.points_ &&
           a.pinned_ == b.pinned_;
  }

 private:
  void validate() const {
    const Eigen::Index n = points_.rows();
    if (n < kMinKnots) {
      throw TooFewKnots("need at least " + std::to_string(kMinKnots) + " knots, got " +
                        std::to_string(n));
    }
    if (static_cast<Eigen::Index>(pinned_.size()) != n) {
      throw InvalidArgument("pinned flags must match knot count");
    }
    if (!points_.allFinite()) throw InvalidArgument("knot coordinates must be finite");
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = (i + 1) % n;
      const Scalar dist = (points_.row(j) - points_.row(i)).norm();
      if (!(dist > Scalar(kCoincidentKnotTol))) {
        throw DegenerateKnots("knots " + std::to_string(i) + " and " + std::to_string(j) +
                              " coincide");
      }
    }
  }

  PointsType points_;
  std::vector<bool> pinned_;
};

template <typename Scalar>
struct SplineDerivatives {
  Point2<Scalar> first;
  Point2<Scalar> second;
};

/// Per-segment cubic coefficients in the local offset t = s - s_i:
///   u_i(t) = a t^3 + b t^2 + c t + d      (row i of `u_coeffs`, columns a b c d)
///   v_i(t) = e t^3 + f t^2 + g t + h      (row i of `v_coeffs`, columns e f g h)
template <typename Scalar>
class PeriodicSpline {
 public:
  using CoeffMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, 4>;

  PeriodicSpline(CoeffMatrix u_coeffs, CoeffMatrix v_coeffs)
      : u_(std::move(u_coeffs)), v_(std::move(v_coeffs)) {}

  Eigen::Index segments() const { return u_.rows(); }
  Scalar spacing() const { return Scalar(1) / Scalar(segments()); }
  Scalar knot_parameter(Eigen::Index k) const { return Scalar(k) / Scalar(segments()); }

  const CoeffMatrix& u_coeffs() const { return u_; }
  const CoeffMatrix& v_coeffs() const { return v_; }

  Point2<Scalar> segment_point(Eigen::Index i, Scalar t) const {
    return {horner(u_.row(i), t), horner(v_.row(i), t)};
  }

  SplineDerivatives<Scalar> segment_derivatives(Eigen::Index i, Scalar t) const {
    auto d1 = [t](const auto& c) { return (Scalar(3) * c(0) * t + Scalar(2) * c(1)) * t + c(2); };
    auto d2 = [t](const auto& c) { return Scalar(6) * c(0) * t + Scalar(2) * c(1); };
    return {{d1(u_.row(i)), d1(v_.row(i))}, {d2(u_.row(i)), d2(v_.row(i))}};
  }

  /// Maps any real parameter onto (segment index, local offset) with s wrapped modulo 1.
  std::pair<Eigen::Index, Scalar> locate(Scalar s) const {
    using std::floor;
    const Eigen::Index n = segments();
    Scalar wrapped = s - floor(s);
    if (wrapped >= Scalar(1)) wrapped = Scalar(0);
    Eigen::Index i = static_cast<Eigen::Index>(floor(wrapped * Scalar(n)));
    if (i >= n) i = n - 1;
    if (i < 0) i = 0;
    return {i, wrapped - knot_parameter(i)};
  }

 private:
  template <typename Row>
  static Scalar horner(const Row& c, Scalar t) {
    return ((c(0) * t + c(1)) * t + c(2)) * t + c(3);
  }

  CoeffMatrix u_;
  CoeffMatrix v_;
};

namespace detail {

// Solves the circulant system  M_{i-1} + 4 M_i + M_{i+1} = rhs_i  for every
// column of rhs (Sherman-Morrison on the cyclic tridiagonal matrix).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 2> solve_cyclic_141(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 2>& rhs) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = rhs.rows();
  const Scalar corner = Scalar(1);
  const Scalar gamma = Scalar(-4);

  Vec diag = Vec::Constant(n, Scalar(4));
  diag(0) -= gamma;
  diag(n - 1) -= corner * corner / gamma;

  // Thomas forward sweep with unit off-diagonals, shared by both solves.
  Vec c_prime(n);
  Vec denom(n);
  denom(0) = diag(0);
  c_prime(0) = Scalar(1) / denom(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    denom(i) = diag(i) - c_prime(i - 1);
    c_prime(i) = Scalar(1) / denom(i);
  }
  auto thomas = [&](auto rhs_block) {
    using Block = std::decay_t<decltype(rhs_block)>;
    Block x = rhs_block;
    x.row(0) /= denom(0);
    for (Eigen::Index i = 1; i < n; ++i) x.row(i) = (x.row(i) - x.row(i - 1)) / denom(i);
    for (Eigen::Index i = n - 2; i >= 0; --i) x.row(i) -= c_prime(i) * x.row(i + 1);
    return x;
  };

  Mat x = thomas(Mat(rhs));
  Vec u = Vec::Zero(n);
  u(0) = gamma;
  u(n - 1) = corner;
  Vec z = thomas(Vec(u));
  const Scalar zden = Scalar(1) + z(0) + corner * z(n - 1) / gamma;
  for (Eigen::Index col = 0; col < 2; ++col) {
    const Scalar fact = (x(0, col) + corner * x(n - 1, col) / gamma) / zden;
    x.col(col) -= fact * z;
  }
  return x;
}

}  // namespace detail

template <typename Scalar>
PeriodicSpline<Scalar> fit_periodic_spline(const KnotVector<Scalar>& knots) {
  using Coeffs = typename PeriodicSpline<Scalar>::CoeffMatrix;
  const auto& y = knots.points();
  const Eigen::Index n = y.rows();
  const Scalar h = Scalar(1) / Scalar(n);

  PointList<Scalar> rhs(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index prev = (i + n - 1) % n;
    const Eigen::Index next = (i + 1) % n;
    rhs.row(i) = (y.row(next) - Scalar(2) * y.row(i) + y.row(prev)) * (Scalar(6) / (h * h));
  }
  // Second derivatives with respect to s at each knot.
  const PointList<Scalar> m = detail::solve_cyclic_141<Scalar>(rhs);

  Coeffs u(n, 4);
  Coeffs v(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index next = (i + 1) % n;
    for (Eigen::Index dim = 0; dim < 2; ++dim) {
      Coeffs& c = dim == 0 ? u : v;
      const Scalar mi = m(i, dim);
      const Scalar mn = m(next, dim);
      c(i, 0) = (mn - mi) / (Scalar(6) * h);
      c(i, 1) = mi / Scalar(2);
      c(i, 2) = (y(next, dim) - y(i, dim)) / h - h * (Scalar(2) * mi + mn) / Scalar(6);
      c(i, 3) = y(i, dim);
    }
  }
  return PeriodicSpline<Scalar>(std::move(u), std::move(v));
}

template <typename Scalar>
Point2<Scalar> eval(const PeriodicSpline<Scalar>& spline, Scalar s) {
  const auto [i, t] = spline.locate(s);
  return spline.segment_point(i, t);
}

template <typename Scalar>
SplineDerivatives<Scalar> eval_derivatives(const PeriodicSpline<Scalar>& spline, Scalar s) {
  const auto [i, t] = spline.locate(s);
  return spline.segment_derivatives(i, t);
}

/// Derivatives at each knot, taken from the right-hand segment (t = 0).
template <typename Scalar>
std::vector<SplineDerivatives<Scalar>> knot_derivatives(const PeriodicSpline<Scalar>& spline) {
  std::vector<SplineDerivatives<Scalar>> out;
  out.reserve(static_cast<std::size_t>(spline.segments()));
  for (Eigen::Index i = 0; i < spline.segments(); ++i) {
    const auto& u = spline.u_coeffs();
    const auto& v = spline.v_coeffs();
    out.push_back({{u(i, 2), v(i, 2)}, {Scalar(2) * u(i, 1), Scalar(2) * v(i, 1)}});
  }
  return out;
}

/// Signed curvature (1/px) at every knot. Positive for counter-clockwise
/// turning in the (u, v) frame.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> curvature_at_knots(const PeriodicSpline<Scalar>& spline) {
  using std::pow;
  using std::sqrt;
  const auto derivs = knot_derivatives(spline);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> kappa(spline.segments());
  for (Eigen::Index i = 0; i < spline.segments(); ++i) {
    const auto& d = derivs[static_cast<std::size_t>(i)];
    const Scalar speed2 = d.first.squaredNorm();
    if (!(sqrt(speed2) > Scalar(kSingularTangentTol))) {
      throw SingularTangent("tangent vanishes at knot " + std::to_string(i));
    }
    const Scalar cross = d.second(1) * d.first(0) - d.second(0) * d.first(1);
    kappa(i) = cross / pow(speed2, Scalar(1.5));
  }
  return kappa;
}

/// Closed polyline of N * samples_per_segment points; the first sample of
/// every segment is its knot.
template <typename Scalar>
PointList<Scalar> sample_polygon(const PeriodicSpline<Scalar>& spline, int samples_per_segment) {
  if (samples_per_segment < 2) throw InvalidArgument("samples_per_segment must be >= 2");
  const Eigen::Index n = spline.segments();
  const Scalar h = spline.spacing();
  PointList<Scalar> out(n * samples_per_segment, 2);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < samples_per_segment; ++j) {
      const Scalar t = h * Scalar(j) / Scalar(samples_per_segment);
      out.row(row++) = spline.segment_point(i, t).transpose();
    }
  }
  return out;
}

using Knots = KnotVector<double>;
using Spline = PeriodicSpline<double>;
using Point = Point2<double>;
using Polygon = PointList<double>;

}  // namespace pics
