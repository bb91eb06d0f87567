#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skepxel/codec.hpp"
#include "skepxel/ftp.hpp"
#include "skepxel/normalization.hpp"
#include "skepxel/recognizer.hpp"
#include "skepxel/skeleton.hpp"

namespace skepxel {

struct LayoutBlock {
  SkeletonLayout layout;
  // Joints appended by pad_joints before encoding; empty means no padding.
  std::vector<std::pair<int, int>> pad;

  int encoded_joint_count() const noexcept {
    return layout.joint_count + static_cast<int>(pad.size());
  }
};

struct ArrangementBlock {
  int h = 5;
  int w = 5;
  int m = 36;
  std::optional<double> gamma_t;  // nullopt = auto
  std::uint64_t seed = 0;
  std::uint64_t max_attempts = 100000;
};

struct CodecBlock {
  int n = 36;
  std::optional<int> stride;  // nullopt = n / 2
  ImageKind kind = ImageKind::kLocationVelocity;
  ExportMode export_mode = ExportMode::kRawF32;
  // Optional declared image size; must agree with m*h and n*w.
  std::optional<int> image_height;
  std::optional<int> image_width;

  int effective_stride() const noexcept { return stride ? *stride : std::max(1, n / 2); }
};

struct AugmentBlock {
  bool enabled = true;
  AugmentationConfig params;
};

enum class Granularity { kVideo, kImage };

struct RecognizerBlock {
  BaselineExtractorConfig extractor;
  std::string classifier = "knn";  // knn | ridge
  int k = 1;
  double lambda = 1.0;
  Granularity granularity = Granularity::kVideo;
};

struct PathsBlock {
  std::filesystem::path manifest = "manifest.json";
  std::filesystem::path arrangement = "arrangement.json";
  std::filesystem::path images = "images";
  std::filesystem::path features = "features";
  std::filesystem::path descriptors = "descriptors.json";
  std::filesystem::path model = "model.json";
  std::filesystem::path report = "report.json";
};

struct PipelineConfig {
  LayoutBlock layout;
  ArrangementBlock arrangement;
  CodecBlock codec;
  AugmentBlock augment;
  PyramidConfig ftp;
  RecognizerBlock recognizer;
  PathsBlock paths;
  unsigned workers = 1;

  // Cross-field checks: h*w equals the encoded joint count, declared image
  // sizes equal m*h and n*w, every block's own invariants.
  void validate() const;
};

// Accepts the same keys from TOML or JSON. Unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig config_from_toml(std::string_view text);
// Dispatches on extension: .toml, otherwise JSON.
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& cfg);

}  // namespace skepxel
