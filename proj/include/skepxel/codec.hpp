#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skepxel/arrangement.hpp"
#include "skepxel/normalization.hpp"
#include "skepxel/skeleton.hpp"
#include "skepxel/tensor.hpp"

namespace skepxel {

// h x w x 3 patch: the coordinates of one frame under one arrangement.
struct Skepxel {
  ImageF data;
};

// m Skepxels of one frame stacked vertically: (m*h) x w x 3.
struct FrameTensor {
  ImageF data;
  int m = 0;
};

// n sample points at start, start + step, ... Integer windows use step 1;
// sequences shorter than n use a single fractional window.
struct WindowSpan {
  double start = 0.0;
  double step = 1.0;
  int n = 0;

  double position(int i) const noexcept { return start + step * i; }
  friend bool operator==(const WindowSpan&, const WindowSpan&) = default;
};

struct WindowPlan {
  std::vector<WindowSpan> windows;
  int n = 0;
  int stride = 0;

  std::size_t size() const noexcept { return windows.size(); }
};

enum class ImageKind { kLocation, kVelocity, kLocationVelocity };

std::string_view to_string(ImageKind kind) noexcept;
ImageKind parse_image_kind(std::string_view text);

// H x W x C image assembled from n frame tensors placed side by side.
struct SkeletalImage {
  ImageF data;
  WindowSpan window;
  std::string arrangement_set_id;
  ImageKind kind = ImageKind::kLocation;
};

Skepxel build_skepxel(const SkeletonFrame& frame, const Arrangement& arrangement);
FrameTensor build_frame_tensor(const SkeletonFrame& frame, const ArrangementSet& set);

// Windows of n frames starting at 0, stride, 2*stride, ...; a final window
// is right-aligned to the end whenever the stride leaves a tail uncovered.
// Sequences shorter than n get one window of n evenly spaced fractional
// positions over [0, seq_len - 1].
WindowPlan plan_windows(std::size_t seq_len, int n, int stride);

// Integer positions copy frames; fractional positions interpolate linearly
// between the neighbouring frames.
std::vector<SkeletonFrame> sample_frames(const SkeletonSequence& seq, const WindowSpan& span);

SkeletalImage build_location_image(const SkeletonSequence& seq, const ArrangementSet& set,
                                   const WindowSpan& span);

// Same layout as the location image, built from p[f+1] - p[f]; the last
// column block repeats the previous difference. Requires n >= 2.
SkeletalImage build_velocity_image(const SkeletonSequence& seq, const ArrangementSet& set,
                                   const WindowSpan& span);

// Channels 0-2 location, 3-5 velocity.
SkeletalImage compose_locvel(const SkeletalImage& loc, const SkeletalImage& vel);

// Builds the image requested by `kind` for one window.
SkeletalImage build_image(const SkeletonSequence& seq, const ArrangementSet& set,
                          const WindowSpan& span, ImageKind kind);

// Appends one joint per recipe pair, the midpoint of the two named joints.
// Pairs may reference joints appended earlier in the same recipe.
SkeletonSequence pad_joints(const SkeletonSequence& seq, int target_joints,
                            std::span<const std::pair<int, int>> recipe);

// "SKPX" + u32 H, W, C (little-endian) + H*W*C f32, channel fastest.
std::vector<std::uint8_t> encode_raw(const ImageF& image);
ImageF decode_raw(std::span<const std::uint8_t> bytes);

// 8-bit RGB PNG, no interlacing. `pixels` must have 3 channels.
std::vector<std::uint8_t> encode_png(const ImageU8& pixels);
ImageU8 decode_png(std::span<const std::uint8_t> bytes);

enum class ExportMode { kRawF32, kPng8 };

std::string_view to_string(ExportMode mode) noexcept;
ExportMode parse_export_mode(std::string_view text);

struct ImageMetadata {
  std::string source;
  std::optional<std::string> label;
  WindowSpan window;
  int stride = 0;
  std::string arrangement_set;
  ImageKind kind = ImageKind::kLocation;
  double fps = 0.0;
  std::vector<ChannelScale> scale;  // png8 only
};

std::string to_json(const ImageMetadata& meta);
ImageMetadata image_metadata_from_json(std::string_view text);

struct ExportedFiles {
  std::vector<std::filesystem::path> data_files;
  std::filesystem::path sidecar;
};

// Writes `<stem>.skpx` (raw) or `<stem>_0.png`, `<stem>_1.png`, ... (one per
// three channels) plus `<stem>.json`.
ExportedFiles export_image(const SkeletalImage& image, ImageMetadata meta, ExportMode mode,
                           const std::filesystem::path& directory, const std::string& stem);

// Reads back an image written by export_image. png8 images are dequantized
// with the sidecar's scale parameters.
SkeletalImage import_image(const std::filesystem::path& sidecar);

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace skepxel
