#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pics/energy.hpp"
#include "pics/volume.hpp"

namespace pics {

inline constexpr const char* kAnnotationSchema = "pics-annotation/1";
inline constexpr const char* kToolVersion = "0.1.0";

// -- images ----------------------------------------------------------------

/// Decodes PGM (P2/P5, up to 16 bit) or grayscale PNG (1-16 bit) bytes and
/// divides by the format maximum. Throws UnsupportedFormat / CorruptFile.
GrayImage decode_gray(std::span<const std::uint8_t> bytes);
GrayImage load_gray(const std::filesystem::path& path);

/// Slices ordered by lexicographic file name. A directory contributes every
/// .pgm/.png file it contains.
ImageStack load_stack(const std::filesystem::path& directory);
ImageStack load_stack(std::vector<std::filesystem::path> files);

/// Writes an 8-bit (or 16-bit) grayscale PGM or PNG, chosen by extension.
void save_gray(const GrayImage& image, const std::filesystem::path& path, int bit_depth = 8);
std::vector<std::uint8_t> encode_pgm(const GrayImage& image, int bit_depth = 8);

/// Writes a binary image with 0 outside and the format maximum inside.
void save_mask(const Mask& mask, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_mask_pgm(const Mask& mask);
/// Pixels above half the format maximum are inside.
Mask load_mask(const std::filesystem::path& path);
Mask decode_mask(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// -- annotations -----------------------------------------------------------

struct AnnotationRecord {
  std::string image_id;
  Eigen::Index width = 0;
  Eigen::Index height = 0;
  Knots knots;
  Hyperparameters hyper;
  LossBreakdown loss;
  std::optional<double> iou;
  std::string tool_version = kToolVersion;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

std::string export_annotation(const AnnotationRecord& record);
/// Throws SchemaVersionMismatch or MalformedDocument.
AnnotationRecord import_annotation(const std::string& document);

nlohmann::json to_json(const Hyperparameters& hyper);
/// Missing keys keep the values of `base`.
Hyperparameters hyper_from_json(const nlohmann::json& j, Hyperparameters base = {});
nlohmann::json to_json(const LossBreakdown& loss);
nlohmann::json knots_to_json(const Knots& knots);

// -- traces --------------------------------------------------------------

/// Header of the trace CSV, in column order.
inline constexpr const char* kTraceCsvHeader = "iteration,j_int,j_ext,j_shape,j_total,opi,mu";

/// One row per iteration; OPI is written as "nan" until the window fills.
std::string trace_csv(const OptimizationTrace& trace);
std::string trace_csv_row(const IterationRecord& record);

// -- presets ---------------------------------------------------------------

struct Preset {
  std::string name;
  std::string description;
  Hyperparameters hyper;
  /// Intensity scale the weights were calibrated against.
  std::string intensity_scale = "unit";
};

class PresetCatalogue {
 public:
  explicit PresetCatalogue(std::vector<Preset> entries);

  const std::vector<Preset>& entries() const { return entries_; }
  const Preset* find(const std::string& name) const;
  /// Throws UnknownPreset.
  const Preset& at(const std::string& name) const;

 private:
  std::vector<Preset> entries_;
};

const PresetCatalogue& builtin_presets();

}  // namespace pics
