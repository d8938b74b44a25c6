#include "pics/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pics {

namespace {

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

Knots build_clamped(const Knots& old, Eigen::VectorXd flat) {
  try {
    return Knots::from_flat(flat, old.pinned());
  } catch (const DegenerateKnots&) {
    // Clamping can pile neighbours onto the same border point; keep their
    // previous positions instead.
    const Eigen::VectorXd prev = old.flat();
    const Eigen::Index n = old.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = (i + 1) % n;
      const double dist = std::hypot(flat(2 * j) - flat(2 * i), flat(2 * j + 1) - flat(2 * i + 1));
      if (!(dist > kCoincidentKnotTol)) {
        flat.segment<2>(2 * i) = prev.segment<2>(2 * i);
        flat.segment<2>(2 * j) = prev.segment<2>(2 * j);
      }
    }
    return Knots::from_flat(flat, old.pinned());
  }
}

}  // namespace

AdamResult adam_step(const AdamState& state, const Knots& knots, const Eigen::VectorXd& grad,
                     const AdamSettings& settings, const Bounds& bounds) {
  const Eigen::Index dims = 2 * knots.size();
  if (grad.size() != dims || state.first_moment.size() != dims ||
      state.second_moment.size() != dims) {
    throw DimensionMismatch("gradient and Adam state must have length 2N");
  }
  AdamState next = state;
  next.step = state.step + 1;
  next.first_moment = settings.beta1 * state.first_moment + (1.0 - settings.beta1) * grad;
  next.second_moment =
      settings.beta2 * state.second_moment + (1.0 - settings.beta2) * grad.cwiseAbs2();
  const double bias1 = 1.0 - std::pow(settings.beta1, static_cast<double>(next.step));
  const double bias2 = 1.0 - std::pow(settings.beta2, static_cast<double>(next.step));

  Eigen::VectorXd w = knots.flat();
  for (Eigen::Index j = 0; j < dims; ++j) {
    if (knots.is_pinned(j / 2)) continue;
    const double m_hat = next.first_moment(j) / bias1;
    const double v_hat = next.second_moment(j) / bias2;
    const double limit = (j % 2 == 0) ? bounds.width : bounds.height;
    w(j) = std::clamp(w(j) - settings.learning_rate * m_hat / (std::sqrt(v_hat) + settings.eps),
                      0.0, limit);
  }
  return {build_clamped(knots, std::move(w)), std::move(next)};
}

Eigen::VectorXd opi_weights(int window) {
  if (window < 2) throw InvalidArgument("OPI window must be >= 2");
  const double d = 1.0 / static_cast<double>(window - 1);
  Eigen::VectorXd theta(window);
  double total = 0.0;
  for (int i = 0; i < window; ++i) {
    theta(i) = std::exp(1.0 + static_cast<double>(i) * d);
    total += theta(i);
  }
  return theta / total;
}

double compute_opi(std::span<const double> j_int, std::span<const double> j_ext, std::size_t k,
                   int window) {
  if (window < 2) throw InvalidArgument("OPI window must be >= 2");
  const auto w = static_cast<std::size_t>(window);
  if (k < w || k >= j_int.size() || k >= j_ext.size()) {
    throw InsufficientHistory("OPI at iteration " + std::to_string(k) + " needs window " +
                              std::to_string(window) + " of history");
  }
  const Eigen::VectorXd theta = opi_weights(window);
  double dot = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t idx = k - w + 1 + i;
    const double p = sign(j_int[idx] - j_int[idx - 1]) - sign(j_ext[idx] - j_ext[idx - 1]);
    const double t = theta(static_cast<Eigen::Index>(i));
    dot += t * p;
    total += t;
  }
  return 1.0 - dot / (2.0 * total);
}

double mu_increment(double j_ext, double j_int, double cap_ratio) {
  if (!(j_int > 0.0)) return 0.0;
  const double ratio = j_ext / j_int;
  if (!(ratio > 0.0) || !std::isfinite(ratio)) return 0.0;
  if (!(j_ext < cap_ratio * j_int)) return 0.0;
  return std::pow(2.0, std::log10(ratio));
}

double adapt_mu(const Hyperparameters& hyper, double j_ext, double j_int, double opi) {
  if (!(opi < hyper.opi_threshold)) return hyper.mu;
  return hyper.mu + mu_increment(j_ext, j_int, hyper.mu_cap_ratio);
}

std::vector<double> OptimizationTrace::j_int_history() const {
  std::vector<double> out{initial_loss.j_int};
  for (const auto& r : records) out.push_back(r.loss.j_int);
  return out;
}

std::vector<double> OptimizationTrace::j_ext_history() const {
  std::vector<double> out{initial_loss.j_ext};
  for (const auto& r : records) out.push_back(r.loss.j_ext);
  return out;
}

std::vector<double> OptimizationTrace::mu_history() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.mu);
  return out;
}

double OptimizationTrace::mean_opi() const {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : records) {
    if (r.has_opi()) {
      sum += r.opi;
      ++count;
    }
  }
  return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

Knots apply_knot_edits(const Knots& knots, std::span<const KnotEdit> edits, const Bounds& bounds) {
  Knots::PointsType pts = knots.points();
  std::vector<bool> pins = knots.pinned();
  for (const auto& e : edits) {
    if (e.index < 0 || e.index >= knots.size()) {
      throw InvalidEdit("knot index " + std::to_string(e.index) + " out of range");
    }
    if (e.position) {
      const Point& p = *e.position;
      if (!p.allFinite() || p.x() < 0.0 || p.x() > bounds.width || p.y() < 0.0 ||
          p.y() > bounds.height) {
        throw InvalidEdit("knot " + std::to_string(e.index) + " moved outside the image");
      }
      pts.row(e.index) = p.transpose();
    }
    if (e.pinned) pins[static_cast<std::size_t>(e.index)] = *e.pinned;
  }
  try {
    return Knots(std::move(pts), std::move(pins));
  } catch (const Error& err) {
    throw InvalidEdit(err.what());
  }
}

void ControlChannel::push_edits(std::vector<KnotEdit> batch) {
  std::lock_guard lock(mutex_);
  pending_.push_back(std::move(batch));
}

void ControlChannel::request_pause() {
  std::lock_guard lock(mutex_);
  pause_ = true;
}

void ControlChannel::clear_pause() {
  std::lock_guard lock(mutex_);
  pause_ = false;
}

bool ControlChannel::pause_requested() const {
  std::lock_guard lock(mutex_);
  return pause_;
}

std::vector<std::vector<KnotEdit>> ControlChannel::take_edits() {
  std::lock_guard lock(mutex_);
  return std::exchange(pending_, {});
}

void ControlChannel::report_rejection(std::string message) {
  std::lock_guard lock(mutex_);
  rejected_.push_back(std::move(message));
}

std::vector<std::string> ControlChannel::rejections() const {
  std::lock_guard lock(mutex_);
  return rejected_;
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::None: return "none";
    case StopReason::Stalled: return "stalled";
    case StopReason::Plateau: return "plateau";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::Paused: return "paused";
  }
  return "unknown";
}

ContourOptimizer::ContourOptimizer(GrayImage image, Knots init, Hyperparameters hyper, int threads)
    : image_(std::move(image)),
      grad_(image_gradient(image_)),
      hyper_(hyper),
      knots_(std::move(init)),
      adam_(AdamState::zeros(2 * knots_.size())),
      mu_(hyper.mu),
      threads_(std::max(1, threads)) {
  hyper_.validate();
  reset_trace();
}

LossBreakdown ContourOptimizer::evaluate(const Knots& knots) const {
  Hyperparameters h = hyper_;
  h.mu = mu_;
  return total_loss(image_, grad_, knots, h);
}

void ContourOptimizer::reset_trace() {
  trace_ = OptimizationTrace{};
  trace_.initial_loss = evaluate(knots_);
  trace_.initial_mu = mu_;
  best_loss_ = trace_.initial_loss;
  since_best_ = 0;
  stall_count_ = 0;
}

void ContourOptimizer::restart() {
  finished_ = false;
  stop_reason_ = StopReason::None;
  adam_ = AdamState::zeros(2 * knots_.size());
  reset_trace();
}

void ContourOptimizer::apply_edits(std::span<const KnotEdit> edits) {
  Knots edited = apply_knot_edits(
      knots_, edits,
      {static_cast<double>(image_.width()), static_cast<double>(image_.height())});
  const bool moved = edited.points() != knots_.points();
  knots_ = std::move(edited);
  if (moved) {
    adam_ = AdamState::zeros(2 * knots_.size());
    best_loss_ = evaluate(knots_);
    since_best_ = 0;
    stall_count_ = 0;
  }
}

double ContourOptimizer::best_total_under(double mu) const {
  return best_loss_.j_int + mu * best_loss_.j_cv + best_loss_.j_shape;
}

StopReason ContourOptimizer::step() {
  if (finished_) return stop_reason_;
  const auto start = std::chrono::steady_clock::now();

  const auto loss = [this](const Knots& k) { return evaluate(k).j_total; };
  const Eigen::VectorXd grad = fd_gradient(loss, knots_, hyper_.fd_step, threads_);
  AdamResult next = adam_step(
      adam_, knots_, grad, AdamSettings::from(hyper_),
      {static_cast<double>(image_.width()), static_cast<double>(image_.height())});
  const double displacement = (next.knots.flat() - knots_.flat()).cwiseAbs().maxCoeff();
  knots_ = std::move(next.knots);
  adam_ = std::move(next.state);

  IterationRecord record;
  record.iteration = static_cast<int>(trace_.records.size()) + 1;
  record.loss = evaluate(knots_);
  record.mu = mu_;
  record.max_displacement = displacement;
  trace_.records.push_back(record);

  const auto k = trace_.records.size();
  if (k >= static_cast<std::size_t>(hyper_.opi_window)) {
    const auto j_int = trace_.j_int_history();
    const auto j_ext = trace_.j_ext_history();
    trace_.records.back().opi = compute_opi(j_int, j_ext, k, hyper_.opi_window);
  }
  const IterationRecord& rec = trace_.records.back();

  if (hyper_.adaptive_mu && rec.has_opi()) {
    Hyperparameters current = hyper_;
    current.mu = mu_;
    mu_ = adapt_mu(current, rec.loss.j_ext, rec.loss.j_int, rec.opi);
  }
  if (hyper_.snapshot_every > 0 && rec.iteration % hyper_.snapshot_every == 0) {
    trace_.snapshots.emplace_back(rec.iteration, knots_);
  }

  stall_count_ = displacement < hyper_.stall_displacement ? stall_count_ + 1 : 0;
  // The best state is re-weighted with the current mu so totals stay
  // comparable after an adaptation step.
  const double best = best_total_under(mu_);
  if (rec.loss.j_total < best - hyper_.plateau_rel_tol * std::abs(best)) {
    best_loss_ = rec.loss;
    since_best_ = 0;
  } else {
    ++since_best_;
  }
  trace_.records.back().wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (stall_count_ >= hyper_.stall_iters) {
    stop_reason_ = StopReason::Stalled;
  } else if (hyper_.plateau_iters > 0 && since_best_ >= hyper_.plateau_iters) {
    stop_reason_ = StopReason::Plateau;
  } else if (static_cast<int>(k) >= hyper_.max_iters) {
    stop_reason_ = StopReason::MaxIterations;
  }
  finished_ = stop_reason_ != StopReason::None;
  return stop_reason_;
}

StopReason ContourOptimizer::run(const IterationObserver& observer, ControlChannel* control) {
  while (!finished_) {
    if (control) {
      for (const auto& batch : control->take_edits()) {
        try {
          apply_edits(batch);
        } catch (const InvalidEdit& e) {
          control->report_rejection(e.what());
        }
      }
      if (control->pause_requested()) return StopReason::Paused;
    }
    if (static_cast<int>(trace_.size()) >= hyper_.max_iters) {
      stop_reason_ = StopReason::MaxIterations;
      finished_ = true;
      break;
    }
    step();
    if (observer) observer(trace_.records.back(), knots_);
  }
  return stop_reason_;
}

OptimizeResult optimize(const GrayImage& image, const Knots& init, const Hyperparameters& hyper,
                        const IterationObserver& observer, ControlChannel* control, int threads) {
  ContourOptimizer opt(image, init, hyper, threads);
  const StopReason reason = opt.run(observer, control);
  return {opt.knots(), opt.trace(), reason};
}

}  // namespace pics
