#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace skepxel {

// Q x D feature matrix; row i is the descriptor of the i-th image of a video.
struct FeatureSeries {
  std::size_t q = 0;
  std::size_t d = 0;
  std::vector<double> values;  // row-major, q * d
  std::string video_id;
  std::optional<std::string> label;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * d, d}; }
  double at(std::size_t i, std::size_t k) const { return values[i * d + k]; }

  // q >= 1, d >= 1, q * d values, all finite.
  void validate() const;
};

struct PyramidConfig {
  int levels = 3;
  int z = 4;
  int min_series_len = 8;

  void validate() const;

  // Rows the series is stretched to before segmentation:
  // max(min_series_len, z * 2^(levels-1)), so every leaf segment holds at
  // least z samples.
  std::size_t effective_min_len() const;
  // D * (2^levels - 1) * z
  std::size_t descriptor_length(std::size_t d) const;
};

struct FtpDescriptor {
  std::vector<double> values;
  PyramidConfig config;
};

// Magnitudes of DFT coefficients k = 0 .. z-1 of `series`. Coefficients
// with k >= L are zero.
std::vector<double> dft_low_freq(std::span<const double> series, int z);

// Fourier Temporal Pyramid. Level k (1-based) cuts the temporal axis into
// 2^(k-1) contiguous near-equal segments; each (segment, dimension) pair
// contributes z low-frequency magnitudes. Output order: level, segment,
// dimension, frequency.
FtpDescriptor ftp_encode(const FeatureSeries& series, const PyramidConfig& cfg);

// Linear interpolation of the rows of `series` onto `rows` evenly spaced
// positions.
FeatureSeries resample_rows(const FeatureSeries& series, std::size_t rows);

// Feature-series container: "FSER" + u32 Q, D, reserved (little-endian) +
// Q*D f32 row-major. Sidecar `<path>.json` holds {"video", "label"}.
void save_features(const FeatureSeries& series, const std::filesystem::path& path);
FeatureSeries load_external_features(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_features(const FeatureSeries& series);
FeatureSeries decode_features(std::span<const std::uint8_t> bytes);

}  // namespace skepxel
