#include "skepxel/ftp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>

#include <json.hpp>

#include "skepxel/codec.hpp"
#include "skepxel/error.hpp"

namespace skepxel {

using nlohmann::json;

void FeatureSeries::validate() const {
  if (q < 1 || d < 1) throw ValidationError("feature series needs Q >= 1 and D >= 1");
  if (values.size() != q * d) {
    throw ValidationError("feature series holds " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(q * d));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ValidationError("feature series row " + std::to_string(i / d) +
                            " contains a non-finite value");
    }
  }
}

void PyramidConfig::validate() const {
  if (levels < 1 || levels > 16) throw ValidationError("pyramid levels must lie in [1, 16]");
  if (z < 1) throw ValidationError("pyramid z must be >= 1");
  if (min_series_len < 1) throw ValidationError("min_series_len must be >= 1");
}

std::size_t PyramidConfig::effective_min_len() const {
  const std::size_t leaf = std::size_t{1} << (levels - 1);
  return std::max(static_cast<std::size_t>(min_series_len), leaf * static_cast<std::size_t>(z));
}

std::size_t PyramidConfig::descriptor_length(std::size_t d) const {
  return d * ((std::size_t{1} << levels) - 1) * static_cast<std::size_t>(z);
}

std::vector<double> dft_low_freq(std::span<const double> series, int z) {
  if (series.empty()) throw ValidationError("DFT of an empty series");
  if (z < 1) throw ValidationError("z must be >= 1");
  const std::size_t len = series.size();
  const std::size_t kept = std::min(len, static_cast<std::size_t>(z));
  std::vector<double> out(static_cast<std::size_t>(z), 0.0);

  // Twiddles indexed by (k * t) mod L keep the phase argument small.
  std::vector<double> cos_table(len);
  std::vector<double> sin_table(len);
  const double base = 2.0 * std::numbers::pi / static_cast<double>(len);
  for (std::size_t i = 0; i < len; ++i) {
    cos_table[i] = std::cos(base * static_cast<double>(i));
    sin_table[i] = std::sin(base * static_cast<double>(i));
  }
  for (std::size_t k = 0; k < kept; ++k) {
    double re = 0.0;
    double im = 0.0;
    std::size_t phase = 0;
    for (std::size_t t = 0; t < len; ++t) {
      re += series[t] * cos_table[phase];
      im -= series[t] * sin_table[phase];
      phase += k;
      if (phase >= len) phase -= len;
    }
    out[k] = std::hypot(re, im);
  }
  return out;
}

FeatureSeries resample_rows(const FeatureSeries& series, std::size_t rows) {
  series.validate();
  if (rows < 1) throw ValidationError("cannot resample to zero rows");
  FeatureSeries out = series;
  out.q = rows;
  out.values.assign(rows * series.d, 0.0);
  const double last = static_cast<double>(series.q - 1);
  for (std::size_t i = 0; i < rows; ++i) {
    const double t = rows == 1 ? 0.0 : last * static_cast<double>(i) / static_cast<double>(rows - 1);
    const auto lo = static_cast<std::size_t>(std::floor(t));
    const std::size_t hi = std::min(lo + 1, series.q - 1);
    const double frac = t - static_cast<double>(lo);
    for (std::size_t k = 0; k < series.d; ++k) {
      const double a = series.at(lo, k);
      const double b = series.at(hi, k);
      out.values[i * series.d + k] = frac == 0.0 ? a : a + frac * (b - a);
    }
  }
  return out;
}

FtpDescriptor ftp_encode(const FeatureSeries& input, const PyramidConfig& cfg) {
  cfg.validate();
  input.validate();
  const std::size_t min_len = cfg.effective_min_len();
  const FeatureSeries series = input.q < min_len ? resample_rows(input, min_len) : input;
  const std::size_t len = series.q;
  const std::size_t d = series.d;
  const auto z = static_cast<std::size_t>(cfg.z);

  FtpDescriptor out;
  out.config = cfg;
  out.values.reserve(cfg.descriptor_length(d));
  std::vector<double> column;
  for (int level = 1; level <= cfg.levels; ++level) {
    const std::size_t segments = std::size_t{1} << (level - 1);
    for (std::size_t s = 0; s < segments; ++s) {
      const std::size_t begin = s * len / segments;
      const std::size_t end = (s + 1) * len / segments;
      column.resize(end - begin);
      for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t t = begin; t < end; ++t) column[t - begin] = series.at(t, k);
        const auto mags = dft_low_freq(column, cfg.z);
        out.values.insert(out.values.end(), mags.begin(), mags.begin() + static_cast<long>(z));
      }
    }
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'F', 'S', 'E', 'R'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[offset + b]) << (8 * b);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_features(const FeatureSeries& series) {
  series.validate();
  std::vector<std::uint8_t> out;
  out.reserve(16 + series.values.size() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, static_cast<std::uint32_t>(series.q));
  put_u32(out, static_cast<std::uint32_t>(series.d));
  put_u32(out, 0);
  for (double v : series.values) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

FeatureSeries decode_features(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("not an FSER feature file");
  }
  FeatureSeries series;
  series.q = get_u32(bytes, 4);
  series.d = get_u32(bytes, 8);
  const std::size_t payload = (bytes.size() - 16) / 4;
  if ((bytes.size() - 16) % 4 != 0 || payload != series.q * series.d) {
    throw ValidationError("feature file header declares Q=" + std::to_string(series.q) +
                          ", D=" + std::to_string(series.d) + " but holds " +
                          std::to_string(payload) + " values");
  }
  series.values.resize(payload);
  for (std::size_t i = 0; i < payload; ++i) {
    series.values[i] = std::bit_cast<float>(get_u32(bytes, 16 + 4 * i));
  }
  series.validate();
  return series;
}

void save_features(const FeatureSeries& series, const std::filesystem::path& path) {
  write_binary_file(path, encode_features(series));
  json side;
  side["video"] = series.video_id;
  side["label"] = series.label ? json(*series.label) : json(nullptr);
  write_text_file(path.string() + ".json", side.dump());
}

FeatureSeries load_external_features(const std::filesystem::path& path) {
  FeatureSeries series = decode_features(read_binary_file(path));
  const std::filesystem::path sidecar = path.string() + ".json";
  series.video_id = path.stem().string();
  if (std::filesystem::exists(sidecar)) {
    try {
      const json side = json::parse(read_text_file(sidecar));
      series.video_id = side.value("video", series.video_id);
      if (side.contains("label") && side["label"].is_string()) {
        series.label = side["label"].get<std::string>();
      }
    } catch (const json::exception& e) {
      throw ParseError("malformed feature sidecar '" + sidecar.string() + "': " + e.what());
    }
  }
  return series;
}

}  // namespace skepxel
