#include "skepxel/normalization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "skepxel/random.hpp"

namespace skepxel {

namespace {

constexpr Mat3 kIdentity{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

Vec3 rotate(const Mat3& r, const Vec3& p) noexcept {
  return {r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z,
          r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z,
          r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z};
}

}  // namespace

Mat3 rotation_to_x_axis(const Vec3& v) {
  const double len = norm(v);
  const Vec3 d = (1.0 / len) * v;
  const double c = d.x;
  // u = d x e_x = (0, d.z, -d.y)
  const double uy = d.z;
  const double uz = -d.y;
  const double s2 = uy * uy + uz * uz;
  if (s2 == 0.0) {
    if (c > 0.0) return kIdentity;
    return Mat3{{{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}}};
  }
  // R = cI + [u]x + k u u^T with k = (1 - c) / |u|^2 = 1 / (1 + c).
  const double k = c > 0.0 ? 1.0 / (1.0 + c) : (1.0 - c) / s2;
  Mat3 r{};
  r[0] = {c, -uz, uy};  // == d
  r[1] = {uz, c + k * uy * uy, k * uy * uz};
  r[2] = {-uy, k * uy * uz, c + k * uz * uz};
  return r;
}

NormalizedSequence normalize_pose(const SkeletonSequence& seq) {
  seq.layout.validate();
  NormalizedSequence out;
  out.sequence = seq;
  const auto hip = static_cast<std::size_t>(seq.layout.hip);
  const auto left = static_cast<std::size_t>(seq.layout.left_shoulder);
  const auto right = static_cast<std::size_t>(seq.layout.right_shoulder);

  Mat3 rotation = kIdentity;
  for (std::size_t f = 0; f < out.sequence.frames.size(); ++f) {
    auto& joints = out.sequence.frames[f].joints;
    const Vec3 anchor = joints[hip];
    for (auto& j : joints) j -= anchor;
    const Vec3 shoulders = joints[right] - joints[left];
    if (norm(shoulders) <= kDegenerateShoulderNorm) {
      out.degenerate_frames.push_back(f);
      if (f == 0) {
        rotation = kIdentity;
        out.first_frame_identity = true;
      }
    } else {
      rotation = rotation_to_x_axis(shoulders);
    }
    for (auto& j : joints) j = rotate(rotation, j);
    joints[hip] = Vec3{};
  }
  return out;
}

void AugmentationConfig::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ValidationError("augmentation sigma must be a finite value >= 0");
  }
  if (copies < 0) throw ValidationError("augmentation copies must be >= 0");
}

std::vector<SkeletonSequence> augment_gaussian(const SkeletonSequence& seq,
                                               const AugmentationConfig& cfg) {
  cfg.validate();
  std::vector<SkeletonSequence> copies;
  copies.reserve(static_cast<std::size_t>(cfg.copies));
  for (int k = 0; k < cfg.copies; ++k) {
    SkeletonSequence copy = seq;
    copy.source_id = seq.source_id + "_aug" + std::to_string(k);
    if (cfg.sigma > 0.0) {
      Rng rng(derive_seed(cfg.seed, 0xa06u, static_cast<std::uint64_t>(k)));
      std::normal_distribution<double> noise(0.0, cfg.sigma);
      for (auto& frame : copy.frames) {
        for (auto& j : frame.joints) {
          j.x += noise(rng);
          j.y += noise(rng);
          j.z += noise(rng);
        }
      }
    }
    copies.push_back(std::move(copy));
  }
  return copies;
}

ScaledImage scale_channels(const ImageF& image) {
  const std::size_t channels = image.channels();
  ScaledImage out;
  out.pixels = ImageU8(image.height(), image.width(), channels);
  out.scales.resize(channels);

  std::vector<double> lo(channels, std::numeric_limits<double>::infinity());
  std::vector<double> hi(channels, -std::numeric_limits<double>::infinity());
  const auto values = image.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v)) throw ValidationError("cannot scale a non-finite image");
    const std::size_t c = i % channels;
    lo[c] = std::min(lo[c], v);
    hi[c] = std::max(hi[c], v);
  }
  for (std::size_t c = 0; c < channels; ++c) {
    if (values.empty()) lo[c] = hi[c] = 0.0;
    out.scales[c] = {lo[c], hi[c], !(hi[c] > lo[c])};
  }
  auto dst = out.pixels.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& s = out.scales[i % channels];
    if (s.degenerate) {
      dst[i] = 0;
      continue;
    }
    const double q = std::round(255.0 * (values[i] - s.min) / (s.max - s.min));
    dst[i] = static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
  }
  return out;
}

ImageF unscale_channels(const ImageU8& pixels, const std::vector<ChannelScale>& scales) {
  if (scales.size() != pixels.channels()) {
    throw ValidationError("scale parameter count does not match channel count");
  }
  ImageF out(pixels.height(), pixels.width(), pixels.channels());
  const auto src = pixels.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& s = scales[i % scales.size()];
    dst[i] = s.degenerate ? static_cast<float>(s.min)
                          : static_cast<float>(s.min + (s.max - s.min) * src[i] / 255.0);
  }
  return out;
}

}  // namespace skepxel
