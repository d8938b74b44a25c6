// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when a
// criterion fails that was not listed with --expect-fail, or when a listed
// one unexpectedly passes.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "pics/fixtures.hpp"
#include "pics/io.hpp"
#include "pics/volume.hpp"

using namespace pics;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome spline_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double interp = 0.0, join = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Knots k = testing::random_knots(rng);
    const Spline sp = fit_periodic_spline(k);
    const Eigen::Index n = k.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      interp = std::max(interp, (eval(sp, sp.knot_parameter(i)) - k.point(i)).norm());
      const auto left = sp.segment_derivatives(i, sp.spacing());
      const auto right = sp.segment_derivatives((i + 1) % n, 0.0);
      const double s1 = std::max(1.0, right.first.norm()), s2 = std::max(1.0, right.second.norm());
      join = std::max({join, (left.first - right.first).norm() / s1,
                       (left.second - right.second).norm() / s2});
    }
  }
  const double secs = seconds_since(t0);
  return {interp <= 1e-9 && join <= 1e-9 && secs < 5.0,
          fmt("max interpolation error %.3g px, max C1/C2 join mismatch %.3g rel, %.2f s", interp,
              join, secs)};
}

Outcome raster_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(4, 32), verts(3, 12);
  std::uniform_real_distribution<double> coord(-4.0, 36.0);
  long bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = size(rng), h = size(rng), n = verts(rng);
    oracle::Points poly(n, 2);
    for (int i = 0; i < n; ++i) poly.row(i) << coord(rng), coord(rng);
    const Mask m = rasterize_mask(poly, w, h);
    const auto ref = oracle::brute_mask(poly, w, h);
    for (int q = 0; q < h; ++q)
      for (int p = 0; p < w; ++p) bad += m(p, q) != ref(q, p);
  }
  return {bad == 0, fmt("%ld pixel disagreements over 100 polygons", bad)};
}

Outcome chan_vese_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ImageArray img(8, 8);
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = u(rng);
    Mask m(8, 8);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> chi(8, 8);
    for (int q = 0; q < 8; ++q)
      for (int p = 0; p < 8; ++p) {
        chi(q, p) = u(rng) < 0.5;
        m.set(p, q, chi(q, p));
      }
    const double gamma = u(rng);
    const GrayImage g(img);
    const double got = chan_vese_energy(g, image_gradient(g), m, gamma);
    const double want = oracle::brute_chan_vese(img, chi, gamma);
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  return {worst <= 1e-12, fmt("max relative error %.3g", worst)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Knots k = testing::random_knots(rng, 6, 20);
    const auto loss = [](const Knots& kk) {
      const auto [s, ss] = internal_energy(fit_periodic_spline(kk));
      return 0.5 * s + 1e-2 * ss;
    };
    const Eigen::VectorXd fd = fd_gradient(loss, k, 1e-3, 1);
    const Eigen::VectorXd exact = oracle::internal_energy_gradient(k.points(), 0.5, 1e-2);
    worst = std::max(worst, (fd - exact).norm() / exact.norm());
  }
  return {worst <= 1e-6, fmt("max relative error %.3g over 50 knot sets", worst)};
}

Outcome opi_arithmetic() {
  std::vector<double> down(11), flat(11, 3.0);
  for (int i = 0; i < 11; ++i) down[i] = 50.0 - 2.0 * i;
  const double both = compute_opi(down, down, 10, 10);
  const double half = compute_opi(flat, down, 10, 10);
  const double a = mu_increment(1.0, 1.0, 1e4), b = mu_increment(100.0, 1.0, 1e4),
               c = mu_increment(1e5, 1.0, 1e4);
  return {both == 1.0 && std::abs(half - 0.5) <= 1e-15 && a == 1.0 && std::abs(b - 4.0) <= 1e-12 &&
              c == 0.0,
          fmt("OPI %.17g and %.17g; mu increments %g, %g, %g", both, half, a, b, c)};
}

Outcome disk_end_to_end() {
  const Fixture f = disk_fixture(FixtureOptions{});
  const auto& h = builtin_presets().at("disk").hyper;
  const auto t0 = Clock::now();
  const OptimizeResult r = optimize(f.image, init_from_click(disk_geometry(128).center, h.init_radius,
                                                             h.n_knots, 128, 128),
                                    h);
  const double secs = seconds_since(t0);
  const double v = iou(contour_mask(r.knots, 128, 128, h.samples_per_segment), f.truth);
  return {v >= 0.95 && r.trace.size() <= 500 && secs < 60.0,
          fmt("IoU %.4f after %zu iterations (%s), %.2f s", v, r.trace.size(),
              std::string(to_string(r.reason)).c_str(), secs)};
}

Outcome shape_prior() {
  const Fixture f = distorted_disk_fixture(FixtureOptions{});
  const FixtureGeometry geo = disk_geometry(128);
  auto run = [&](const char* preset) {
    const Hyperparameters& h = builtin_presets().at(preset).hyper;
    const Knots init = init_from_click(geo.center, 20.0, h.n_knots, 128, 128);
    const OptimizeResult r = optimize(f.image, init, h);
    const double v = iou(contour_mask(r.knots, 128, 128, h.samples_per_segment), *f.reference);
    return std::pair{v, shape_penalty(fit_periodic_spline(r.knots))};
  };
  const auto [iou0, k0] = run("distorted-disk");
  const auto [iou1, k1] = run("distorted-disk-shape");
  return {iou1 - iou0 >= 0.05 && k1 < k0,
          fmt("IoU vs undistorted disk %.4f (sigma 0) -> %.4f (sigma 1e8), gain %.4f; mean "
              "kappa^2 %.3g -> %.3g",
              iou0, iou1, iou1 - iou0, k0, k1)};
}

Outcome cavity() {
  const Fixture f = cavity_fixture(FixtureOptions{});
  const auto& h = builtin_presets().at("cavity").hyper;
  const OptimizeResult r =
      optimize(f.image, init_from_click(cavity_seed(128), h.init_radius, h.n_knots, 128, 128), h);
  const double v = iou(contour_mask(r.knots, 128, 128, h.samples_per_segment), f.truth);
  bool monotone = true, capped = true;
  const auto mu = r.trace.mu_history();
  for (std::size_t i = 1; i < mu.size(); ++i) {
    monotone = monotone && mu[i] >= mu[i - 1];
    const LossBreakdown& prev = r.trace.records[i - 1].loss;
    if (mu[i] > mu[i - 1]) capped = capped && prev.j_ext < h.mu_cap_ratio * prev.j_int;
  }
  return {v >= 0.90 && monotone && capped,
          fmt("IoU %.4f, mu %g -> %g over %zu iterations, non-decreasing %s, capped %s", v,
              mu.front(), mu.back(), r.trace.size(), monotone ? "yes" : "no", capped ? "yes" : "no")};
}

Outcome transfer() {
  const Fixture f = disk_fixture(FixtureOptions{});
  const VolumeResult v = segment_volume(ImageStack(std::vector<GrayImage>(5, f.image)),
                                        disk_geometry(128).center, builtin_presets().at("disk").hyper);
  const int first = v.slices[0].iterations;
  bool ok = true;
  std::string counts = std::to_string(first);
  for (std::size_t n = 1; n < v.slices.size(); ++n) {
    ok = ok && 2 * v.slices[n].iterations <= first;
    counts += "/" + std::to_string(v.slices[n].iterations);
  }
  return {ok, "iterations per slice " + counts};
}

Outcome pinning() {
  const Fixture f = disk_fixture(FixtureOptions{});
  Hyperparameters h = builtin_presets().at("disk").hyper;
  h.max_iters = 200;
  h.plateau_iters = 0;
  h.stall_iters = 1000;
  const Knots start = init_from_click(disk_geometry(128).center, h.init_radius, h.n_knots);
  std::vector<bool> pins(static_cast<std::size_t>(start.size()), false);
  pins[0] = pins[1] = true;
  const OptimizeResult r = optimize(f.image, Knots(start.points(), pins), h);
  const bool same = r.knots.point(0) == start.point(0) && r.knots.point(1) == start.point(1);
  return {same && r.trace.size() == 200,
          fmt("%zu iterations, pinned knots %s", r.trace.size(), same ? "bit-identical" : "moved")};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const auto dir = testing::scratch_dir("acceptance_cli");
  save_gray(disk_fixture(FixtureOptions{}).image, dir / "disk.pgm");
  auto run = [&](const char* out) {
    const std::string cmd = std::string(PICS_CLI_PATH) + " -q segment2d --image " +
                            (dir / "disk.pgm").string() + " --click 64,64 --trace-out " +
                            (dir / out).string();
    return std::system(cmd.c_str());
  };
  const int a = run("a.csv"), b = run("b.csv");
  const std::string ta = slurp(dir / "a.csv"), tb = slurp(dir / "b.csv");
  const bool same = a == 0 && b == 0 && !ta.empty() && ta == tb;
  return {same, fmt("exit codes %d/%d, traces %zu bytes, %s", a, b, ta.size(),
                    same ? "byte-identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<std::string> expected;
  std::vector<std::string> only;
  app.add_option("--expect-fail", expected, "criteria known to fail");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
      {"spline-suite", spline_suite},       {"raster-oracle", raster_oracle},
      {"chan-vese-oracle", chan_vese_oracle}, {"gradient-check", gradient_check},
      {"opi-arithmetic", opi_arithmetic},   {"disk-end-to-end", disk_end_to_end},
      {"shape-prior", shape_prior},         {"cavity-adaptive-mu", cavity},
      {"transfer-learning", transfer},      {"pinning", pinning},
      {"cli-determinism", cli_determinism},
  };
  const std::set<std::string> known(expected.begin(), expected.end());
  int unexpected = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const bool expect_fail = known.count(name) > 0;
    std::printf("%s %-20s %s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                !o.pass && expect_fail ? " [known failure]"
                : o.pass && expect_fail ? " [expected to fail but passed]"
                                        : "");
    std::fflush(stdout);
    if (o.pass == expect_fail) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
