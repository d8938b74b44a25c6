#include "pics/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

namespace pics {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin());
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Raw samples plus the format maximum, before normalization.
struct RawGray {
  Eigen::Index width = 0;
  Eigen::Index height = 0;
  std::uint32_t max_value = 0;
  std::vector<std::uint32_t> samples;
};

class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  RawGray read() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || (bytes_[1] != '2' && bytes_[1] != '5')) {
      throw UnsupportedFormat("not a grayscale PGM (P2/P5) or PNG file");
    }
    const bool ascii = bytes_[1] == '2';
    pos_ = 2;
    RawGray raw;
    raw.width = header_int();
    raw.height = header_int();
    const long max_value = header_int();
    if (raw.width <= 0 || raw.height <= 0) throw CorruptFile("PGM dimensions must be positive");
    if (max_value < 1 || max_value > 65535) throw CorruptFile("PGM maxval must be in [1, 65535]");
    raw.max_value = static_cast<std::uint32_t>(max_value);
    const auto count = static_cast<std::size_t>(raw.width * raw.height);
    raw.samples.resize(count);
    if (ascii) {
      for (auto& s : raw.samples) s = static_cast<std::uint32_t>(header_int());
    } else {
      if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
        throw CorruptFile("PGM header not terminated by whitespace");
      }
      ++pos_;
      const std::size_t width = max_value < 256 ? 1 : 2;
      if (bytes_.size() - pos_ < count * width) throw CorruptFile("PGM pixel data truncated");
      for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* p = bytes_.data() + pos_ + i * width;
        raw.samples[i] = width == 1 ? p[0] : (static_cast<std::uint32_t>(p[0]) << 8 | p[1]);
      }
    }
    for (auto s : raw.samples) {
      if (s > raw.max_value) throw CorruptFile("PGM sample exceeds maxval");
    }
    return raw;
  }

 private:
  long header_int() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw CorruptFile("PGM truncated or malformed");
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000) throw CorruptFile("PGM integer too large");
      ++pos_;
    }
    return value;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct PngSource {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->bytes.size() - src->pos < length) png_error(png, "truncated PNG data");
  std::memcpy(out, src->bytes.data() + src->pos, length);
  src->pos += length;
}

void png_throw_error(png_structp png, png_const_charp message) {
  auto* msg = static_cast<std::string*>(png_get_error_ptr(png));
  *msg = message;
  png_longjmp(png, 1);
}

void png_ignore_warning(png_structp, png_const_charp) {}

RawGray decode_png(std::span<const std::uint8_t> bytes) {
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_throw_error,
                                           png_ignore_warning);
  if (!png) throw CorruptFile("cannot allocate PNG reader");
  png_infop info = png_create_info_struct(png);
  PngSource src{bytes, 0};
  RawGray raw;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> buffer;
  volatile bool unsupported = false;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw CorruptFile("PNG decode failed: " + error);
  }
  png_set_read_fn(png, &src, png_read_from_span);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    unsupported = true;
  } else {
    raw.width = static_cast<Eigen::Index>(png_get_image_width(png, info));
    raw.height = static_cast<Eigen::Index>(png_get_image_height(png, info));
    raw.max_value = depth == 16 ? 65535u : (1u << depth) - 1u;
    if (depth < 8) png_set_packing(png);
    png_read_update_info(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * static_cast<std::size_t>(raw.height));
    rows.resize(static_cast<std::size_t>(raw.height));
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = buffer.data() + r * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    raw.samples.resize(static_cast<std::size_t>(raw.width * raw.height));
    for (Eigen::Index q = 0; q < raw.height; ++q) {
      const std::uint8_t* row = rows[static_cast<std::size_t>(q)];
      for (Eigen::Index p = 0; p < raw.width; ++p) {
        raw.samples[static_cast<std::size_t>(q * raw.width + p)] =
            depth == 16 ? (static_cast<std::uint32_t>(row[2 * p]) << 8 | row[2 * p + 1]) : row[p];
      }
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (unsupported) throw UnsupportedFormat("only grayscale PNG images are supported");
  return raw;
}

RawGray decode_raw(std::span<const std::uint8_t> bytes) {
  return is_png(bytes) ? decode_png(bytes) : PgmReader(bytes).read();
}

std::vector<std::uint8_t> encode_png(const std::vector<std::uint16_t>& samples, Eigen::Index width,
                                     Eigen::Index height, int bit_depth) {
  std::string error;
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_throw_error,
                                            png_ignore_warning);
  if (!png) throw IoError("cannot allocate PNG writer");
  png_infop info = png_create_info_struct(png);
  const std::size_t bpp = bit_depth == 16 ? 2 : 1;
  std::vector<std::uint8_t> buffer(samples.size() * bpp);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (bpp == 2) {
      buffer[2 * i] = static_cast<std::uint8_t>(samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<std::uint8_t>(samples[i] & 0xFF);
    } else {
      buffer[i] = static_cast<std::uint8_t>(samples[i]);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r] = buffer.data() + r * static_cast<std::size_t>(width) * bpp;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed: " + error);
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* o = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        o->insert(o->end(), data, data + len);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::vector<std::uint8_t> encode_pgm_samples(const std::vector<std::uint16_t>& samples,
                                             Eigen::Index width, Eigen::Index height,
                                             std::uint32_t max_value) {
  const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) +
                             "\n" + std::to_string(max_value) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (auto s : samples) {
    if (max_value > 255) out.push_back(static_cast<std::uint8_t>(s >> 8));
    out.push_back(static_cast<std::uint8_t>(s & 0xFF));
  }
  return out;
}

std::vector<std::uint16_t> quantize(const GrayImage& image, std::uint32_t max_value) {
  std::vector<std::uint16_t> out;
  out.reserve(static_cast<std::size_t>(image.pixels().size()));
  for (Eigen::Index q = 0; q < image.height(); ++q) {
    for (Eigen::Index p = 0; p < image.width(); ++p) {
      out.push_back(static_cast<std::uint16_t>(std::lround(image(p, q) * max_value)));
    }
  }
  return out;
}

std::vector<std::uint16_t> mask_samples(const Mask& mask, std::uint16_t on) {
  std::vector<std::uint16_t> out;
  out.reserve(static_cast<std::size_t>(mask.cells().size()));
  for (Eigen::Index q = 0; q < mask.height(); ++q) {
    for (Eigen::Index p = 0; p < mask.width(); ++p) out.push_back(mask(p, q) ? on : 0);
  }
  return out;
}

std::uint32_t max_for_depth(int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("bit depth must be 8 or 16");
  return bit_depth == 16 ? 65535u : 255u;
}

}  // namespace

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

GrayImage decode_gray(std::span<const std::uint8_t> bytes) {
  const RawGray raw = decode_raw(bytes);
  ImageArray pixels(raw.height, raw.width);
  const double scale = 1.0 / static_cast<double>(raw.max_value);
  for (Eigen::Index i = 0; i < pixels.size(); ++i) {
    pixels.data()[i] = static_cast<double>(raw.samples[static_cast<std::size_t>(i)]) * scale;
  }
  // Exact at the extremes: max * (1 / max) may round below 1.
  for (Eigen::Index i = 0; i < pixels.size(); ++i) {
    if (raw.samples[static_cast<std::size_t>(i)] == raw.max_value) pixels.data()[i] = 1.0;
  }
  return GrayImage(std::move(pixels));
}

GrayImage load_gray(const fs::path& path) { return decode_gray(read_file(path)); }

Mask decode_mask(std::span<const std::uint8_t> bytes) {
  const RawGray raw = decode_raw(bytes);
  MaskArray cells(raw.height, raw.width);
  for (Eigen::Index i = 0; i < cells.size(); ++i) {
    cells.data()[i] = 2u * raw.samples[static_cast<std::size_t>(i)] > raw.max_value ? 1 : 0;
  }
  return Mask(std::move(cells));
}

Mask load_mask(const fs::path& path) { return decode_mask(read_file(path)); }

ImageStack load_stack(std::vector<fs::path> files) {
  if (files.empty()) throw InvalidArgument("no slice files given");
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  std::vector<GrayImage> slices;
  for (const auto& f : files) slices.push_back(load_gray(f));
  return ImageStack(std::move(slices));
}

ImageStack load_stack(const fs::path& directory) {
  if (!fs::is_directory(directory)) return load_stack(std::vector<fs::path>{directory});
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    const auto ext = lower_extension(entry.path());
    if (entry.is_regular_file() && (ext == ".pgm" || ext == ".png")) files.push_back(entry.path());
  }
  if (files.empty()) throw IoError("no .pgm/.png slices in " + directory.string());
  return load_stack(std::move(files));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image, int bit_depth) {
  const auto max_value = max_for_depth(bit_depth);
  return encode_pgm_samples(quantize(image, max_value), image.width(), image.height(), max_value);
}

void save_gray(const GrayImage& image, const fs::path& path, int bit_depth) {
  const auto max_value = max_for_depth(bit_depth);
  if (lower_extension(path) == ".png") {
    write_file(path, encode_png(quantize(image, max_value), image.width(), image.height(), bit_depth));
  } else {
    write_file(path, encode_pgm(image, bit_depth));
  }
}

std::vector<std::uint8_t> encode_mask_pgm(const Mask& mask) {
  return encode_pgm_samples(mask_samples(mask, 255), mask.width(), mask.height(), 255);
}

void save_mask(const Mask& mask, const fs::path& path) {
  if (lower_extension(path) == ".png") {
    write_file(path, encode_png(mask_samples(mask, 255), mask.width(), mask.height(), 8));
  } else {
    write_file(path, encode_mask_pgm(mask));
  }
}

// -- JSON ------------------------------------------------------------------

json to_json(const Hyperparameters& h) {
  return json{{"alpha", h.alpha},
              {"beta", h.beta},
              {"mu", h.mu},
              {"gamma", h.gamma},
              {"sigma", h.sigma},
              {"learning_rate", h.learning_rate},
              {"adam_beta1", h.adam_beta1},
              {"adam_beta2", h.adam_beta2},
              {"adam_eps", h.adam_eps},
              {"max_iters", h.max_iters},
              {"fd_step", h.fd_step},
              {"opi_window", h.opi_window},
              {"opi_threshold", h.opi_threshold},
              {"mu_cap_ratio", h.mu_cap_ratio},
              {"adaptive_mu", h.adaptive_mu},
              {"samples_per_segment", h.samples_per_segment},
              {"init_radius", h.init_radius},
              {"n_knots", h.n_knots},
              {"stall_displacement", h.stall_displacement},
              {"stall_iters", h.stall_iters},
              {"plateau_iters", h.plateau_iters},
              {"plateau_rel_tol", h.plateau_rel_tol},
              {"snapshot_every", h.snapshot_every}};
}

Hyperparameters hyper_from_json(const json& j, Hyperparameters h) {
  if (!j.is_object()) throw MalformedDocument("hyperparameters must be an object");
  auto get = [&j](const char* key, auto& field) {
    if (auto it = j.find(key); it != j.end()) {
      try {
        it->get_to(field);
      } catch (const json::exception& e) {
        throw MalformedDocument(std::string("hyperparameter '") + key + "': " + e.what());
      }
    }
  };
  get("alpha", h.alpha);
  get("beta", h.beta);
  get("mu", h.mu);
  get("gamma", h.gamma);
  get("sigma", h.sigma);
  get("learning_rate", h.learning_rate);
  get("adam_beta1", h.adam_beta1);
  get("adam_beta2", h.adam_beta2);
  get("adam_eps", h.adam_eps);
  get("max_iters", h.max_iters);
  get("fd_step", h.fd_step);
  get("opi_window", h.opi_window);
  get("opi_threshold", h.opi_threshold);
  get("mu_cap_ratio", h.mu_cap_ratio);
  get("adaptive_mu", h.adaptive_mu);
  get("samples_per_segment", h.samples_per_segment);
  get("init_radius", h.init_radius);
  get("n_knots", h.n_knots);
  get("stall_displacement", h.stall_displacement);
  get("stall_iters", h.stall_iters);
  get("plateau_iters", h.plateau_iters);
  get("plateau_rel_tol", h.plateau_rel_tol);
  get("snapshot_every", h.snapshot_every);
  return h;
}

json to_json(const LossBreakdown& l) {
  return json{{"j_psi_s", l.j_psi_s}, {"j_psi_ss", l.j_psi_ss}, {"j_cv", l.j_cv},
              {"curv_penalty", l.curv_penalty}, {"j_int", l.j_int}, {"j_ext", l.j_ext},
              {"j_shape", l.j_shape}, {"j_total", l.j_total}};
}

json knots_to_json(const Knots& knots) {
  json pts = json::array();
  for (Eigen::Index i = 0; i < knots.size(); ++i) pts.push_back({knots.points()(i, 0), knots.points()(i, 1)});
  return pts;
}

std::string export_annotation(const AnnotationRecord& r) {
  json doc{{"schema", kAnnotationSchema},
           {"image", {{"id", r.image_id}, {"width", r.width}, {"height", r.height}}},
           {"knots", knots_to_json(r.knots)},
           {"pinned", r.knots.pinned()},
           {"hyperparameters", to_json(r.hyper)},
           {"loss", to_json(r.loss)},
           {"iou", r.iou ? json(*r.iou) : json(nullptr)},
           {"tool_version", r.tool_version}};
  return doc.dump(2) + "\n";
}

AnnotationRecord import_annotation(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw MalformedDocument(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw MalformedDocument("annotation must be a JSON object");
  const auto schema = doc.find("schema");
  if (schema == doc.end() || !schema->is_string()) throw MalformedDocument("missing 'schema'");
  if (schema->get<std::string>() != kAnnotationSchema) {
    throw SchemaVersionMismatch("expected " + std::string(kAnnotationSchema) + ", got " +
                                schema->get<std::string>());
  }
  auto require = [&doc](const char* key) -> const json& {
    const auto it = doc.find(key);
    if (it == doc.end()) throw MalformedDocument(std::string("missing '") + key + "'");
    return *it;
  };
  try {
    const json& image = require("image");
    const json& knots = require("knots");
    const json& pinned = require("pinned");
    if (!knots.is_array() || !pinned.is_array()) throw MalformedDocument("knots/pinned must be arrays");
    Knots::PointsType pts(static_cast<Eigen::Index>(knots.size()), 2);
    for (std::size_t i = 0; i < knots.size(); ++i) {
      const json& k = knots[i];
      if (!k.is_array() || k.size() != 2) throw MalformedDocument("each knot must be [x, y]");
      pts(static_cast<Eigen::Index>(i), 0) = k[0].get<double>();
      pts(static_cast<Eigen::Index>(i), 1) = k[1].get<double>();
    }
    std::vector<bool> pins = pinned.get<std::vector<bool>>();
    if (pins.size() != knots.size()) throw MalformedDocument("pinned must have one flag per knot");

    const json& loss = require("loss");
    LossBreakdown l{loss.at("j_psi_s").get<double>(), loss.at("j_psi_ss").get<double>(),
                    loss.at("j_cv").get<double>(),    loss.at("curv_penalty").get<double>(),
                    loss.at("j_int").get<double>(),   loss.at("j_ext").get<double>(),
                    loss.at("j_shape").get<double>(), loss.at("j_total").get<double>()};
    std::optional<double> iou_value;
    if (const auto it = doc.find("iou"); it != doc.end() && !it->is_null()) iou_value = it->get<double>();

    Knots kv = [&] {
      try {
        return Knots(std::move(pts), std::move(pins));
      } catch (const Error& e) {
        throw MalformedDocument(std::string("invalid knots: ") + e.what());
      }
    }();
    return AnnotationRecord{image.at("id").get<std::string>(),
                            image.at("width").get<Eigen::Index>(),
                            image.at("height").get<Eigen::Index>(),
                            std::move(kv),
                            hyper_from_json(require("hyperparameters")),
                            l,
                            iou_value,
                            require("tool_version").get<std::string>()};
  } catch (const json::exception& e) {
    throw MalformedDocument(e.what());
  }
}

// -- traces ----------------------------------------------------------------

std::string trace_csv_row(const IterationRecord& r) {
  char buf[512];
  auto num = [](double v) {
    if (std::isnan(v)) return std::string("nan");
    char b[32];
    std::snprintf(b, sizeof b, "%.17g", v);
    return std::string(b);
  };
  std::snprintf(buf, sizeof buf, "%d,%s,%s,%s,%s,%s,%s", r.iteration, num(r.loss.j_int).c_str(),
                num(r.loss.j_ext).c_str(), num(r.loss.j_shape).c_str(),
                num(r.loss.j_total).c_str(), num(r.opi).c_str(), num(r.mu).c_str());
  return buf;
}

std::string trace_csv(const OptimizationTrace& trace) {
  std::string out = std::string(kTraceCsvHeader) + "\n";
  for (const auto& r : trace.records) out += trace_csv_row(r) + "\n";
  return out;
}

// -- presets ---------------------------------------------------------------

PresetCatalogue::PresetCatalogue(std::vector<Preset> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].hyper.validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (entries_[i].name == entries_[j].name) {
        throw InvalidArgument("duplicate preset name '" + entries_[i].name + "'");
      }
    }
  }
}

const Preset* PresetCatalogue::find(const std::string& name) const {
  for (const auto& p : entries_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const Preset& PresetCatalogue::at(const std::string& name) const {
  if (const Preset* p = find(name)) return *p;
  throw UnknownPreset("no preset named '" + name + "'");
}

namespace {

Preset make_preset(std::string name, std::string description, double alpha, double beta,
                   double mu, double gamma, double sigma, int n_knots = 10) {
  Hyperparameters h;
  h.alpha = alpha;
  h.beta = beta;
  h.mu = mu;
  h.gamma = gamma;
  h.sigma = sigma;
  h.n_knots = n_knots;
  return {std::move(name), std::move(description), h, "unit"};
}

}  // namespace

const PresetCatalogue& builtin_presets() {
  static const PresetCatalogue catalogue = [] {
    std::vector<Preset> entries;
    entries.push_back(make_preset("disk", "binary disk benchmark", 5e-1, 1e-2, 1e3, 0, 0));
    entries.push_back(make_preset("hydrocephalus", "enlarged ventricles, CT, no shape prior",
                                  5e-1, 5e-2, 1e3, 0, 0, 11));
    entries.push_back(make_preset("distorted-disk", "disk with a distorted boundary, no shape prior",
                                  5e-1, 1e-2, 1e4, 0, 0, 15));
    entries.push_back(make_preset("distorted-disk-shape", "disk with a distorted boundary, convexity prior",
                                  5e-1, 1e-2, 1e4, 0, 1e8, 15));
    entries.push_back(make_preset("cavity", "U-shaped cavity, adaptive mu from 1e3",
                                  5e-1, 1e-2, 1e3, 0, 0, 20));
    entries.push_back(make_preset("lv-ed", "left ventricle, end-diastole, no shape prior",
                                  5e-1, 1e-3, 1e4, 0, 0));
    entries.push_back(make_preset("lv-ed-shape", "left ventricle, end-diastole, convexity prior",
                                  5e-1, 1e-3, 1e4, 0, 1e8));
    const Preset normal = make_preset("acdc-normal", "cardiac MRI, normal case",
                                      1e-1, 1e-2, 1e4, 1e-5, 1e7);
    Preset indistinct = normal;
    indistinct.name = "acdc-indistinct";
    indistinct.description = "cardiac MRI, indistinct muscles (sigma x10)";
    indistinct.hyper.sigma = normal.hyper.sigma * 10.0;
    Preset thin = normal;
    thin.name = "acdc-thin-myocardium";
    thin.description = "cardiac MRI, very thin myocardium (gamma x100)";
    thin.hyper.gamma = normal.hyper.gamma * 100.0;
    entries.push_back(normal);
    entries.push_back(indistinct);
    entries.push_back(thin);
    return PresetCatalogue(std::move(entries));
  }();
  return catalogue;
}

}  // namespace pics
