#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "pics/fixtures.hpp"
#include "pics/io.hpp"

using namespace pics;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

GrayImage ramp(int w, int h) {
  ImageArray px(h, w);
  for (int q = 0; q < h; ++q)
    for (int p = 0; p < w; ++p) px(q, p) = static_cast<double>(p + q * w) / (w * h - 1);
  return GrayImage(px);
}

AnnotationRecord sample_record(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Knots k = testing::random_knots(rng, 4, 16);
  std::vector<bool> pins(static_cast<std::size_t>(k.size()));
  for (std::size_t i = 0; i < pins.size(); ++i) pins[i] = u(rng) < 0.3;
  Hyperparameters h;
  h.alpha = u(rng);
  h.beta = u(rng) * 1e-2;
  h.mu = u(rng) * 1e4;
  h.sigma = u(rng) * 1e8;
  h.max_iters = 1 + static_cast<int>(u(rng) * 900);
  h.adaptive_mu = u(rng) < 0.5;
  AnnotationRecord r{"slice_" + std::to_string(static_cast<int>(u(rng) * 1000)) + ".png",
                     128,
                     96,
                     Knots(k.points(), pins),
                     h,
                     {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng) / 3.0},
                     std::nullopt,
                     kToolVersion};
  if (u(rng) < 0.5) r.iou = u(rng);
  return r;
}

}  // namespace

TEST_CASE("PGM decoding normalizes to [0, 1]") {
  SUBCASE("8-bit binary") {
    std::string s = "P5\n# comment\n4 4\n255\n";
    s += std::string{'\0', static_cast<char>(128), static_cast<char>(255)};
    s += std::string(13, '\x40');
    const GrayImage g = decode_gray(bytes_of(s));
    CHECK(g.width() == 4);
    CHECK(g(0, 0) == 0.0);
    CHECK(g(1, 0) == doctest::Approx(128.0 / 255.0));
    CHECK(g(2, 0) == 1.0);
    CHECK(g(3, 3) == doctest::Approx(64.0 / 255.0));
  }
  SUBCASE("16-bit binary is big-endian") {
    std::string s = "P5 4 4 65535\n";
    s += std::string{'\x01', '\x00', '\xff', '\xff'};
    s += std::string(28, '\0');
    const GrayImage g = decode_gray(bytes_of(s));
    CHECK(g(0, 0) == doctest::Approx(256.0 / 65535.0));
    CHECK(g(1, 0) == 1.0);
  }
  SUBCASE("ASCII with an odd maxval") {
    const GrayImage g = decode_gray(bytes_of("P2\n4 4\n7\n0 7 0 0\n3 4 0 0\n0 0 0 0\n0 0 0 0\n"));
    CHECK(g(1, 0) == 1.0);
    CHECK(g(0, 1) == doctest::Approx(3.0 / 7.0));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(decode_gray(bytes_of("P5\n4 4\n255\nabc")), CorruptFile);
    CHECK_THROWS_AS(decode_gray(bytes_of("P5\n4")), CorruptFile);
    CHECK_THROWS_AS(decode_gray(bytes_of("P2\n1 1\n10\n11\n")), CorruptFile);
    CHECK_THROWS_AS(decode_gray(bytes_of("P6\n1 1\n255\nabc")), UnsupportedFormat);
    CHECK_THROWS_AS(decode_gray(bytes_of("GIF89a")), UnsupportedFormat);
    CHECK_THROWS_AS(decode_gray(bytes_of("")), UnsupportedFormat);
    CHECK_THROWS_AS(load_gray("/nonexistent/file.pgm"), IoError);
  }
}

TEST_CASE("image round trips") {
  const fs::path dir = testing::scratch_dir("io_images");
  const GrayImage img = ramp(17, 5);
  for (const char* name : {"a.pgm", "a.png"}) {
    for (int depth : {8, 16}) {
      const fs::path path = dir / name;
      save_gray(img, path, depth);
      const GrayImage back = load_gray(path);
      const double maxval = depth == 8 ? 255.0 : 65535.0;
      REQUIRE(back.width() == 17);
      REQUIRE(back.height() == 5);
      CHECK((back.pixels() - img.pixels()).abs().maxCoeff() <= 0.5 / maxval + 1e-15);
      CHECK(back(0, 0) == 0.0);
      CHECK(back(16, 4) == 1.0);
    }
  }
  SUBCASE("truncated PNG is corrupt") {
    save_gray(img, dir / "t.png");
    auto bytes = read_file(dir / "t.png");
    bytes.resize(bytes.size() / 2);
    CHECK_THROWS_AS(decode_gray(bytes), CorruptFile);
  }
  SUBCASE("truncated PGM is corrupt") {
    auto bytes = encode_pgm(img);
    bytes.pop_back();
    CHECK_THROWS_AS(decode_gray(bytes), CorruptFile);
  }
  SUBCASE("invalid bit depth") {
    CHECK_THROWS_AS(encode_pgm(img, 12), InvalidArgument);
  }
}

TEST_CASE("mask round trip") {
  const fs::path dir = testing::scratch_dir("io_masks");
  std::mt19937_64 rng(8);
  std::bernoulli_distribution on(0.4);
  Mask m(23, 11);
  for (int q = 0; q < 11; ++q)
    for (int p = 0; p < 23; ++p) m.set(p, q, on(rng));
  for (const char* name : {"m.pgm", "m.png"}) {
    save_mask(m, dir / name);
    CHECK(load_mask(dir / name) == m);
  }
  CHECK(decode_mask(encode_mask_pgm(m)) == m);
  // Anything above half of maxval counts as inside.
  const Mask t = decode_mask(bytes_of("P2 3 1 255\n127 128 255\n"));
  CHECK_FALSE(t(0, 0));
  CHECK(t(1, 0));
  CHECK(t(2, 0));
}

TEST_CASE("stacks") {
  const fs::path dir = testing::scratch_dir("io_stack");
  std::vector<GrayImage> slices;
  for (int i = 0; i < 10; ++i) slices.emplace_back(8, 6, i / 9.0);
  // Written out of order; loading sorts by file name.
  for (int i = 9; i >= 0; --i) {
    char name[32];
    std::snprintf(name, sizeof name, "slice_%02d.%s", i, i % 2 ? "png" : "pgm");
    save_gray(slices[i], dir / name);
  }
  std::ofstream(dir / "notes.txt") << "ignored";
  const ImageStack s = load_stack(dir);
  REQUIRE(s.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(s[i](3, 3) == doctest::Approx(i / 9.0).epsilon(1e-2));

  CHECK(load_stack(dir / "slice_03.png").size() == 1);
  const ImageStack picked = load_stack(std::vector<fs::path>{dir / "slice_05.png", dir / "slice_02.pgm"});
  CHECK(picked[0](0, 0) == doctest::Approx(2 / 9.0).epsilon(1e-2));

  save_gray(GrayImage(9, 6), dir / "slice_99.pgm");
  CHECK_THROWS_AS(load_stack(dir), DimensionMismatch);
  CHECK_THROWS_AS(load_stack(testing::scratch_dir("io_empty")), IoError);
  CHECK_THROWS_AS(load_stack(dir / "missing.pgm"), IoError);
}

TEST_CASE("annotation documents") {
  std::mt19937_64 rng(99);

  SUBCASE("property: export then import is lossless") {
    for (int trial = 0; trial < 100; ++trial) {
      const AnnotationRecord r = sample_record(rng);
      const std::string doc = export_annotation(r);
      REQUIRE(import_annotation(doc) == r);
      REQUIRE(export_annotation(import_annotation(doc)) == doc);
    }
  }
  SUBCASE("schema fields and knot precision") {
    const AnnotationRecord r = sample_record(rng);
    const auto j = nlohmann::json::parse(export_annotation(r));
    CHECK(j.at("schema") == "pics-annotation/1");
    CHECK(j.at("image").at("width") == 128);
    CHECK(j.at("knots").size() == static_cast<std::size_t>(r.knots.size()));
    CHECK(j.at("knots")[0][0].get<double>() == r.knots.point(0).x());
    CHECK(j.at("tool_version") == kToolVersion);
  }
  SUBCASE("hand-written minimal document") {
    const std::string doc = R"({
      "schema": "pics-annotation/1",
      "image": {"id": "case.png", "width": 64, "height": 48},
      "knots": [[10, 10], [30, 10], [30, 30], [10, 30]],
      "pinned": [false, true, false, false],
      "hyperparameters": {"alpha": 0.5, "mu": 1000},
      "loss": {"j_psi_s": 0, "j_psi_ss": 0, "j_cv": 0, "curv_penalty": 0,
               "j_int": 0, "j_ext": 0, "j_shape": 0, "j_total": 0},
      "tool_version": "hand"
    })";
    const AnnotationRecord r = import_annotation(doc);
    CHECK(r.image_id == "case.png");
    CHECK(r.height == 48);
    CHECK(r.knots.size() == 4);
    CHECK(r.knots.is_pinned(1));
    CHECK(r.hyper.mu == 1000);
    CHECK(r.hyper.beta == Hyperparameters{}.beta);
    CHECK_FALSE(r.iou.has_value());
  }
  SUBCASE("malformed and mismatched documents") {
    auto j = nlohmann::json::parse(export_annotation(sample_record(rng)));
    for (const char* key : {"image", "knots", "pinned", "loss", "hyperparameters", "tool_version"}) {
      auto broken = j;
      broken.erase(key);
      CHECK_THROWS_AS(import_annotation(broken.dump()), MalformedDocument);
    }
    auto wrong = j;
    wrong["schema"] = "pics-annotation/2";
    CHECK_THROWS_AS(import_annotation(wrong.dump()), SchemaVersionMismatch);
    auto short_pins = j;
    short_pins["pinned"] = {true};
    CHECK_THROWS_AS(import_annotation(short_pins.dump()), MalformedDocument);
    auto three = j;
    three["knots"] = {{1, 1}, {2, 2}, {3, 1}};
    three["pinned"] = {false, false, false};
    CHECK_THROWS_AS(import_annotation(three.dump()), MalformedDocument);
    auto bad_hyper = j;
    bad_hyper["hyperparameters"]["alpha"] = "high";
    CHECK_THROWS_AS(import_annotation(bad_hyper.dump()), MalformedDocument);
    CHECK_THROWS_AS(import_annotation("{not json"), MalformedDocument);
    CHECK_THROWS_AS(import_annotation("[]"), MalformedDocument);
  }
}

TEST_CASE("preset catalogue") {
  const PresetCatalogue& c = builtin_presets();
  auto weights = [&](const char* name) {
    const Hyperparameters& h = c.at(name).hyper;
    return std::array<double, 5>{h.alpha, h.beta, h.mu, h.gamma, h.sigma};
  };
  using W = std::array<double, 5>;
  CHECK(weights("hydrocephalus") == W{5e-1, 5e-2, 1e3, 0, 0});
  CHECK(c.at("hydrocephalus").hyper.n_knots == 11);
  CHECK(weights("distorted-disk") == W{5e-1, 1e-2, 1e4, 0, 0});
  CHECK(weights("distorted-disk-shape") == W{5e-1, 1e-2, 1e4, 0, 1e8});
  CHECK(weights("lv-ed") == W{5e-1, 1e-3, 1e4, 0, 0});
  CHECK(weights("lv-ed-shape") == W{5e-1, 1e-3, 1e4, 0, 1e8});
  CHECK(weights("acdc-normal") == W{1e-1, 1e-2, 1e4, 1e-5, 1e7});
  CHECK(weights("acdc-indistinct") == W{1e-1, 1e-2, 1e4, 1e-5, 1e8});
  CHECK(weights("acdc-thin-myocardium") == W{1e-1, 1e-2, 1e4, 1e-3, 1e7});
  for (const auto& p : c.entries()) {
    CHECK(p.intensity_scale == "unit");
    CHECK_NOTHROW(p.hyper.validate());
  }
  CHECK(c.find("nope") == nullptr);
  CHECK_THROWS_AS(c.at("nope"), UnknownPreset);
  CHECK_THROWS_AS(PresetCatalogue({c.entries()[0], c.entries()[0]}), InvalidArgument);
}

TEST_CASE("hyperparameter JSON") {
  Hyperparameters h;
  h.sigma = 3e7;
  h.plateau_iters = 0;
  CHECK(hyper_from_json(to_json(h)) == h);
  const Hyperparameters partial = hyper_from_json({{"mu", 5.0}}, h);
  CHECK(partial.mu == 5.0);
  CHECK(partial.sigma == 3e7);
  CHECK_THROWS_AS(hyper_from_json(nlohmann::json::array()), MalformedDocument);
}

TEST_CASE("trace CSV") {
  OptimizationTrace t;
  IterationRecord a;
  a.iteration = 1;
  a.loss = {1, 2, 3, 4, 0.5, 1.25, 0, 1.75};
  a.mu = 1000;
  IterationRecord b = a;
  b.iteration = 2;
  b.opi = 0.75;
  t.records = {a, b};
  const std::string csv = trace_csv(t);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == kTraceCsvHeader);
  CHECK(line == "iteration,j_int,j_ext,j_shape,j_total,opi,mu");
  std::getline(in, line);
  CHECK(line == "1,0.5,1.25,0,1.75,nan,1000");
  std::getline(in, line);
  CHECK(line == "2,0.5,1.25,0,1.75,0.75,1000");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("fixtures") {
  FixtureOptions o;
  o.noise = 0.05;
  o.seed = 3;
  for (const auto& name : fixture_names()) {
    const auto a = make_fixture_stack(name, o);
    const auto b = make_fixture_stack(name, o);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].image.pixels().cwiseEqual(b[i].image.pixels()).all());
      CHECK(a[i].truth == b[i].truth);
      CHECK(a[i].image.width() == 128);
      CHECK(a[i].truth.count() > 0);
    }
  }
  CHECK(make_fixture_stack("translating-stack", o).size() == 5);
  CHECK(make_fixture_stack("disk", o).size() == 1);
  CHECK_THROWS_AS(make_fixture("translating-stack", o), UnknownFixture);
  CHECK_THROWS_AS(make_fixture("square", o), UnknownFixture);

  SUBCASE("seeds change the noise") {
    FixtureOptions other = o;
    other.seed = 4;
    CHECK_FALSE(disk_fixture(o).image.pixels().cwiseEqual(disk_fixture(other).image.pixels()).all());
  }
  SUBCASE("noise-free disk is binary and matches its truth") {
    const Fixture f = disk_fixture(FixtureOptions{});
    for (Eigen::Index q = 0; q < 128; ++q)
      for (Eigen::Index p = 0; p < 128; ++p) REQUIRE(f.image(p, q) == (f.truth(p, q) ? 1.0 : 0.0));
  }
  SUBCASE("distorted disk keeps the undistorted reference") {
    const Fixture f = distorted_disk_fixture(FixtureOptions{});
    REQUIRE(f.reference.has_value());
    CHECK(f.reference->count() > f.truth.count());
    CHECK(iou(*f.reference, f.truth) < 1.0);
    FixtureOptions bad;
    bad.bite_depth = 1.5;
    CHECK_THROWS_AS(distorted_disk_fixture(bad), InvalidArgument);
  }
  SUBCASE("cavity seed lies in the foreground") {
    const Fixture f = cavity_fixture(FixtureOptions{});
    const Point s = cavity_seed(128);
    CHECK(f.truth(static_cast<Eigen::Index>(s.x()), static_cast<Eigen::Index>(s.y())));
  }
  SUBCASE("translating stack shifts by the configured step") {
    const auto st = translating_stack_fixture(FixtureOptions{});
    for (std::size_t i = 1; i < st.size(); ++i) {
      CHECK(st[i].truth.count() == doctest::Approx(st[0].truth.count()).epsilon(0.02));
      CHECK(iou(st[i].truth, st[i - 1].truth) < 1.0);
    }
  }
}
