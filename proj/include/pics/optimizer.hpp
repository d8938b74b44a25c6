#pragma once

#include <Eigen/Core>

#include <chrono>
#include <cstddef>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pics/energy.hpp"
#include "pics/parallel.hpp"

namespace pics {

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step = 0;

  static AdamState zeros(Eigen::Index dims) {
    return {Eigen::VectorXd::Zero(dims), Eigen::VectorXd::Zero(dims), 0};
  }
};

struct AdamSettings {
  double learning_rate = 0.5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamSettings from(const Hyperparameters& h) {
    return {h.learning_rate, h.adam_beta1, h.adam_beta2, h.adam_eps};
  }
};

/// Axis-aligned rectangle knots are clamped into after every update.
struct Bounds {
  double width;
  double height;
};

struct AdamResult {
  Knots knots;
  AdamState state;
};

/// Central-difference loss gradient with respect to the interleaved knot
/// coordinates [u0, v0, u1, v1, ...]. Pinned knots get exactly zero.
/// `loss` must be safe to call concurrently when `threads > 1`.
template <typename Loss>
Eigen::VectorXd fd_gradient(const Loss& loss, const Knots& knots, double h, int threads = 1) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  const Eigen::VectorXd w = knots.flat();
  const Eigen::Index dims = w.size();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(dims);
  parallel_for(static_cast<std::size_t>(dims), threads, [&](std::size_t j) {
    const auto idx = static_cast<Eigen::Index>(j);
    if (knots.is_pinned(idx / 2)) return;
    Eigen::VectorXd probe = w;
    probe(idx) = w(idx) + h;
    const double plus = loss(Knots::from_flat(probe, knots.pinned()));
    probe(idx) = w(idx) - h;
    const double minus = loss(Knots::from_flat(probe, knots.pinned()));
    grad(idx) = (plus - minus) / (2.0 * h);
  });
  return grad;
}

/// Bias-corrected Adam update of the unpinned coordinates, clamped to `bounds`.
AdamResult adam_step(const AdamState& state, const Knots& knots, const Eigen::VectorXd& grad,
                     const AdamSettings& settings, const Bounds& bounds);

/// Normalized exponential weights exp(1 + i d) / sum, d = 1 / (w - 1).
Eigen::VectorXd opi_weights(int window);

/// OPI at iteration k from loss histories whose index 0 is the initial
/// evaluation and index i the evaluation after iteration i. Differences are
/// forward: dJ(i) = J(i) - J(i - 1) for i = k - w + 1 .. k.
/// Throws InsufficientHistory when k < w or the histories are too short.
double compute_opi(std::span<const double> j_int, std::span<const double> j_ext, std::size_t k,
                   int window);

/// 2^log10(j_ext / j_int); zero when the ratio is not positive and finite,
/// or when j_ext >= cap_ratio * j_int.
double mu_increment(double j_ext, double j_int, double cap_ratio);

/// Returns the new mu: incremented only when `opi` is below the threshold.
double adapt_mu(const Hyperparameters& hyper, double j_ext, double j_int, double opi);

struct IterationRecord {
  int iteration = 0;
  LossBreakdown loss;
  double opi = std::numeric_limits<double>::quiet_NaN();  ///< NaN until the window fills
  double mu = 0.0;                                        ///< mu used for `loss`
  double max_displacement = 0.0;
  double wall_seconds = 0.0;

  bool has_opi() const { return opi == opi; }
};

struct OptimizationTrace {
  LossBreakdown initial_loss;
  double initial_mu = 0.0;
  std::vector<IterationRecord> records;
  std::vector<std::pair<int, Knots>> snapshots;

  std::size_t size() const { return records.size(); }
  /// j_int / j_ext histories with the initial evaluation at index 0.
  std::vector<double> j_int_history() const;
  std::vector<double> j_ext_history() const;
  std::vector<double> mu_history() const;
  double mean_opi() const;  ///< NaN when no OPI value exists
};

struct KnotEdit {
  Eigen::Index index = 0;
  std::optional<Point> position;
  std::optional<bool> pinned;
};

/// Applies a batch of edits atomically. Throws InvalidEdit when an index is
/// out of range, a position leaves `bounds`, or the result violates the
/// knot invariants.
Knots apply_knot_edits(const Knots& knots, std::span<const KnotEdit> edits, const Bounds& bounds);

/// Thread-safe mailbox between an optimization loop and its controller.
/// Edits and pause requests are only observed at iteration boundaries.
class ControlChannel {
 public:
  void push_edits(std::vector<KnotEdit> batch);
  void request_pause();
  void clear_pause();
  bool pause_requested() const;
  std::vector<std::vector<KnotEdit>> take_edits();
  void report_rejection(std::string message);
  std::vector<std::string> rejections() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::vector<KnotEdit>> pending_;
  std::vector<std::string> rejected_;
  bool pause_ = false;
};

enum class StopReason { None, Stalled, Plateau, MaxIterations, Paused };

std::string to_string(StopReason reason);

using IterationObserver = std::function<void(const IterationRecord&, const Knots&)>;

/// Resumable optimization loop. Owns its knots, Adam state, mu and trace.
class ContourOptimizer {
 public:
  ContourOptimizer(GrayImage image, Knots init, Hyperparameters hyper,
                   int threads = default_thread_count());

  /// One iteration: gradient, Adam step, loss at the new knots, OPI, mu update.
  /// Returns the stop reason triggered by this iteration (None to continue).
  StopReason step();

  /// Runs until a stop rule fires or a pause is requested on `control`.
  StopReason run(const IterationObserver& observer = {}, ControlChannel* control = nullptr);

  /// Replaces knots between iterations; resets Adam moments when a knot moved.
  void apply_edits(std::span<const KnotEdit> edits);

  /// Clears the stop state so `run` continues from the current knots with a
  /// fresh iteration budget and trace.
  void restart();

  const Knots& knots() const { return knots_; }
  const OptimizationTrace& trace() const { return trace_; }
  const Hyperparameters& hyper() const { return hyper_; }
  double mu() const { return mu_; }
  bool finished() const { return finished_; }
  StopReason stop_reason() const { return stop_reason_; }
  const GrayImage& image() const { return image_; }
  LossBreakdown evaluate(const Knots& knots) const;

 private:
  void reset_trace();
  double best_total_under(double mu) const;

  GrayImage image_;
  GradField grad_;
  Hyperparameters hyper_;
  Knots knots_;
  AdamState adam_;
  OptimizationTrace trace_;
  double mu_;
  int threads_;
  int stall_count_ = 0;
  LossBreakdown best_loss_;
  int since_best_ = 0;
  bool finished_ = false;
  StopReason stop_reason_ = StopReason::None;
};

struct OptimizeResult {
  Knots knots;
  OptimizationTrace trace;
  StopReason reason;
};

OptimizeResult optimize(const GrayImage& image, const Knots& init, const Hyperparameters& hyper,
                        const IterationObserver& observer = {}, ControlChannel* control = nullptr,
                        int threads = default_thread_count());

}  // namespace pics
