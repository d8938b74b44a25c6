// pics: batch front end for contour segmentation.
//
//   pics segment2d --image img.pgm --click 64,64 --preset disk --mask-out m.pgm ...
//   pics segment3d --stack slices/ --click 64,64 --out-dir out/
//   pics eval a.pgm b.pgm
//   pics make-fixture disk --size 128 --out fixtures/disk
//   pics presets

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pics/fixtures.hpp"
#include "pics/io.hpp"
#include "pics/volume.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitBadInput = 2;

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw pics::InvalidArgument(std::string("cannot parse ") + what + " '" + text + "'");
    }
  }
  return out;
}

struct ClickSpec {
  pics::Point point;
  std::optional<double> radius;
  std::optional<int> knots;
};

ClickSpec parse_click(const std::string& text) {
  const auto v = parse_numbers(text, "click");
  if (v.size() != 2 && v.size() != 4) {
    throw pics::InvalidArgument("--click expects x,y or x,y,r,n");
  }
  ClickSpec spec{{v[0], v[1]}, std::nullopt, std::nullopt};
  if (v.size() == 4) {
    spec.radius = v[2];
    spec.knots = static_cast<int>(v[3]);
  }
  return spec;
}

// Options shared by the segmentation commands.
struct EngineFlags {
  std::string preset;
  std::string weights;
  std::string hyper_file;
  std::optional<int> max_iters;
  std::optional<double> learning_rate;
  std::optional<double> fd_step;
  std::optional<int> samples;
  bool fixed_mu = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "named hyperparameter preset (see `pics presets`)");
    cmd->add_option("--weights", weights, "explicit alpha,beta,mu,gamma,sigma");
    cmd->add_option("--hyper", hyper_file, "JSON file with hyperparameter overrides");
    cmd->add_option("--max-iters", max_iters, "iteration budget");
    cmd->add_option("--lr", learning_rate, "Adam learning rate (px)");
    cmd->add_option("--fd-step", fd_step, "finite-difference step (px)");
    cmd->add_option("--samples", samples, "polygon samples per spline segment");
    cmd->add_flag("--fixed-mu", fixed_mu, "disable OPI-driven mu adaptation");
  }

  pics::Hyperparameters resolve() const {
    pics::Hyperparameters h = builtin_default();
    if (!preset.empty()) h = pics::builtin_presets().at(preset).hyper;
    if (!weights.empty()) {
      const auto w = parse_numbers(weights, "weights");
      if (w.size() != 5) throw pics::InvalidArgument("--weights expects alpha,beta,mu,gamma,sigma");
      h.alpha = w[0];
      h.beta = w[1];
      h.mu = w[2];
      h.gamma = w[3];
      h.sigma = w[4];
    }
    if (!hyper_file.empty()) {
      const auto bytes = pics::read_file(hyper_file);
      try {
        h = pics::hyper_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()), h);
      } catch (const nlohmann::json::exception& e) {
        throw pics::MalformedDocument(e.what());
      }
    }
    if (max_iters) h.max_iters = *max_iters;
    if (learning_rate) h.learning_rate = *learning_rate;
    if (fd_step) h.fd_step = *fd_step;
    if (samples) h.samples_per_segment = *samples;
    if (fixed_mu) h.adaptive_mu = false;
    h.validate();
    return h;
  }

  static pics::Hyperparameters builtin_default() { return pics::builtin_presets().at("disk").hyper; }
};

void write_text(const fs::path& path, const std::string& text) {
  pics::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

pics::AnnotationRecord make_record(const std::string& id, const pics::GrayImage& image,
                                   const pics::SliceResult& result,
                                   const pics::Hyperparameters& hyper) {
  return pics::AnnotationRecord{id,           image.width(),     image.height(), result.knots,
                                hyper,        result.final_loss, result.iou,     pics::kToolVersion};
}

std::string format_double(double v, const char* fmt = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

int cmd_segment2d(const std::string& image_path, const std::string& click_text,
                  const std::string& init_annotation, const EngineFlags& flags,
                  const std::string& truth_path, const std::string& mask_out,
                  const std::string& annotation_out, const std::string& trace_out, bool quiet) {
  const pics::GrayImage image = pics::load_gray(image_path);
  pics::Hyperparameters hyper = flags.resolve();

  std::optional<pics::Knots> init;
  if (!init_annotation.empty()) {
    const auto bytes = pics::read_file(init_annotation);
    const auto record = pics::import_annotation(std::string(bytes.begin(), bytes.end()));
    init = record.knots;
  } else if (!click_text.empty()) {
    const ClickSpec click = parse_click(click_text);
    if (click.radius) hyper.init_radius = *click.radius;
    if (click.knots) hyper.n_knots = *click.knots;
    hyper.validate();
    init = pics::init_from_click(click.point, hyper.init_radius, hyper.n_knots,
                                 static_cast<double>(image.width()),
                                 static_cast<double>(image.height()));
  } else {
    throw pics::InvalidArgument("either --click or --init-annotation is required");
  }

  std::optional<pics::Mask> truth;
  if (!truth_path.empty()) truth = pics::load_mask(truth_path);

  const auto result =
      pics::segment_slice(image, *init, hyper, {}, truth ? &*truth : nullptr);

  if (!mask_out.empty()) pics::save_mask(result.mask, mask_out);
  if (!annotation_out.empty()) {
    write_text(annotation_out, pics::export_annotation(
                                   make_record(fs::path(image_path).filename().string(), image,
                                               result, hyper)));
  }
  if (!trace_out.empty()) write_text(trace_out, pics::trace_csv(result.trace));

  if (!quiet) {
    std::cout << "iterations " << result.iterations << "\n"
              << "stop " << pics::to_string(result.reason) << "\n"
              << "j_total " << format_double(result.final_loss.j_total, "%.9g") << "\n"
              << "mu " << format_double(result.trace.records.empty() ? hyper.mu
                                                                     : result.trace.records.back().mu,
                                        "%.9g")
              << "\n";
    if (result.iou) std::cout << "iou " << format_double(*result.iou) << "\n";
  }
  return kExitOk;
}

int cmd_segment3d(const std::vector<std::string>& stack_paths, const std::string& click_text,
                  const EngineFlags& flags, const std::string& truth_dir,
                  const std::string& out_dir, bool quiet) {
  for (const auto& p : stack_paths) {
    if (!fs::exists(p)) throw pics::IoError("no such slice path: " + p);
  }
  const pics::ImageStack stack =
      stack_paths.size() == 1 ? pics::load_stack(fs::path(stack_paths[0]))
                              : pics::load_stack(std::vector<fs::path>(stack_paths.begin(),
                                                                       stack_paths.end()));
  pics::Hyperparameters hyper = flags.resolve();
  const ClickSpec click = parse_click(click_text);
  if (click.radius) hyper.init_radius = *click.radius;
  if (click.knots) hyper.n_knots = *click.knots;
  hyper.validate();

  pics::VolumeOptions options;
  if (!truth_dir.empty()) {
    const pics::ImageStack truth = pics::load_stack(fs::path(truth_dir));
    if (truth.size() != stack.size()) {
      throw pics::DimensionMismatch("truth stack has " + std::to_string(truth.size()) +
                                    " slices, image stack " + std::to_string(stack.size()));
    }
    for (const auto& t : truth.slices()) {
      pics::MaskArray cells = (t.pixels() > 0.5).cast<std::uint8_t>();
      options.references.emplace_back(std::move(cells));
    }
  }
  const pics::VolumeResult result = pics::segment_volume(stack, click.point, hyper, {}, options);

  fs::create_directories(out_dir);
  std::string summary = "slice,iterations,stop,initial_total,final_total,mean_opi,iou,collapsed\n";
  for (std::size_t n = 0; n < result.slices.size(); ++n) {
    const auto& s = result.slices[n];
    char stem[32];
    std::snprintf(stem, sizeof stem, "slice_%03zu", n);
    const fs::path base = fs::path(out_dir) / stem;
    pics::save_mask(s.mask, base.string() + "_mask.pgm");
    write_text(base.string() + ".json",
               pics::export_annotation(make_record(stem, stack[n], s, hyper)));
    write_text(base.string() + "_trace.csv", pics::trace_csv(s.trace));
    summary += std::to_string(n) + "," + std::to_string(s.iterations) + "," +
               pics::to_string(s.reason) + "," + format_double(s.initial_loss.j_total, "%.9g") +
               "," + format_double(s.final_loss.j_total, "%.9g") + "," +
               (std::isnan(s.mean_opi) ? std::string("nan") : format_double(s.mean_opi)) + "," +
               (s.iou ? format_double(*s.iou) : std::string("")) + "," +
               (s.collapsed ? "1" : "0") + "\n";
  }
  write_text(fs::path(out_dir) / "summary.csv", summary);
  if (!quiet) std::cout << summary;
  return kExitOk;
}

int cmd_eval(const std::string& a, const std::string& b) {
  const double value = pics::iou(pics::load_mask(a), pics::load_mask(b));
  std::cout << format_double(value) << "\n";
  return kExitOk;
}

int cmd_make_fixture(const std::string& name, const pics::FixtureOptions& options,
                     const std::string& out) {
  const auto& names = pics::fixture_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw pics::UnknownFixture("unknown fixture '" + name + "'");
  }
  if (name == "translating-stack") {
    const auto slices = pics::translating_stack_fixture(options);
    const fs::path dir(out);
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "truth");
    for (std::size_t n = 0; n < slices.size(); ++n) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "slice_%03zu.pgm", n);
      pics::save_gray(slices[n].image, dir / "images" / stem);
      pics::save_mask(slices[n].truth, dir / "truth" / stem);
    }
    std::cout << "wrote " << slices.size() << " slices to " << dir.string() << "\n";
    return kExitOk;
  }
  const pics::Fixture f = pics::make_fixture(name, options);
  const fs::path prefix(out);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  pics::save_gray(f.image, prefix.string() + ".pgm");
  pics::save_mask(f.truth, prefix.string() + "_truth.pgm");
  if (f.reference) pics::save_mask(*f.reference, prefix.string() + "_reference.pgm");
  std::cout << "wrote " << prefix.string() << ".pgm (" << f.truth.count() << " foreground px)\n";
  return kExitOk;
}

int cmd_presets() {
  for (const auto& p : pics::builtin_presets().entries()) {
    const auto& h = p.hyper;
    std::printf("%-22s (%g, %g, %g, %g, %g) knots=%d  %s\n", p.name.c_str(), h.alpha, h.beta,
                h.mu, h.gamma, h.sigma, h.n_knots, p.description.c_str());
  }
  return kExitOk;
}

int exit_code_for(const pics::Error& e) {
  switch (e.code()) {
    case pics::ErrorCode::IoError:
    case pics::ErrorCode::UnsupportedFormat:
    case pics::ErrorCode::CorruptFile:
    case pics::ErrorCode::InvalidArgument:
    case pics::ErrorCode::OutOfBounds:
    case pics::ErrorCode::UnknownFixture:
    case pics::ErrorCode::UnknownPreset:
    case pics::ErrorCode::MalformedDocument:
    case pics::ErrorCode::SchemaVersionMismatch:
    case pics::ErrorCode::DimensionMismatch:
      return kExitBadInput;
    default:
      return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contour segmentation with spline knots optimized on a region energy"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress the summary on stdout");

  auto* seg2 = app.add_subcommand("segment2d", "segment one image");
  std::string image_path, click, init_annotation, truth, mask_out, annotation_out, trace_out;
  EngineFlags flags2;
  seg2->add_option("--image", image_path, "grayscale PGM/PNG image")->required();
  seg2->add_option("--click", click, "initial click x,y or x,y,radius,knots");
  seg2->add_option("--init-annotation", init_annotation, "start from an exported annotation");
  seg2->add_option("--truth", truth, "reference mask for IoU");
  seg2->add_option("--mask-out", mask_out, "output mask (PGM/PNG)");
  seg2->add_option("--annotation-out", annotation_out, "output annotation JSON");
  seg2->add_option("--trace-out", trace_out, "output trace CSV");
  flags2.add_to(seg2);

  auto* seg3 = app.add_subcommand("segment3d", "segment an image stack with warm starts");
  std::vector<std::string> stack_paths;
  std::string click3, truth_dir, out_dir;
  EngineFlags flags3;
  seg3->add_option("--stack", stack_paths, "slice directory or slice files")->required();
  seg3->add_option("--click", click3, "click on the first slice x,y or x,y,radius,knots")->required();
  seg3->add_option("--truth-dir", truth_dir, "directory of reference masks for IoU");
  seg3->add_option("--out-dir", out_dir, "output directory")->required();
  flags3.add_to(seg3);

  auto* eval = app.add_subcommand("eval", "IoU of two masks");
  std::string mask_a, mask_b;
  eval->add_option("mask_a", mask_a)->required();
  eval->add_option("mask_b", mask_b)->required();

  auto* fixture = app.add_subcommand("make-fixture", "write a synthetic test case");
  std::string fixture_name, fixture_out;
  pics::FixtureOptions fixture_options;
  fixture->add_option("name", fixture_name, "disk | distorted-disk | cavity | translating-stack")
      ->required();
  fixture->add_option("--size", fixture_options.size, "image side in px");
  fixture->add_option("--noise", fixture_options.noise, "Gaussian noise sigma (intensity units)");
  fixture->add_option("--seed", fixture_options.seed, "noise seed");
  fixture->add_option("--slices", fixture_options.slices, "translating-stack slice count");
  fixture->add_option("--shift", fixture_options.shift, "translating-stack px per slice");
  fixture->add_option("--bite-depth", fixture_options.bite_depth,
                      "distorted-disk bite depth as a fraction of the radius");
  fixture->add_option("--bite-arc", fixture_options.bite_arc_deg, "distorted-disk bite arc (deg)");
  fixture->add_option("--bite-level", fixture_options.bite_level,
                      "distorted-disk intensity inside the bite");
  fixture->add_option("--out", fixture_out, "output prefix (directory for stacks)")->required();

  auto* presets = app.add_subcommand("presets", "list built-in hyperparameter presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }

  try {
    if (*seg2) {
      return cmd_segment2d(image_path, click, init_annotation, flags2, truth, mask_out,
                           annotation_out, trace_out, quiet);
    }
    if (*seg3) return cmd_segment3d(stack_paths, click3, flags3, truth_dir, out_dir, quiet);
    if (*eval) return cmd_eval(mask_a, mask_b);
    if (*fixture) return cmd_make_fixture(fixture_name, fixture_options, fixture_out);
    if (*presets) return cmd_presets();
  } catch (const pics::Error& e) {
    std::cerr << "pics: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "pics: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
