#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "skepxel/skeleton.hpp"
#include "skepxel/tensor.hpp"

namespace skepxel {

// Frames whose shoulder vector is shorter than this reuse the previous
// frame's rotation.
inline constexpr double kDegenerateShoulderNorm = 1e-8;

struct NormalizedSequence {
  SkeletonSequence sequence;
  // Indices of frames with a degenerate shoulder vector.
  std::vector<std::size_t> degenerate_frames;
  // Set when frame 0 was degenerate and an identity rotation was used.
  bool first_frame_identity = false;
};

using Mat3 = std::array<std::array<double, 3>, 3>;

// Minimal rotation taking direction `v` onto +x. An antiparallel `v` is
// turned half way round the z axis.
Mat3 rotation_to_x_axis(const Vec3& v);

// Per frame: translate the hip joint to the origin, then rotate so that
// right_shoulder - left_shoulder points along +x.
NormalizedSequence normalize_pose(const SkeletonSequence& seq);

struct AugmentationConfig {
  double sigma = 0.02;
  int copies = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// cfg.copies perturbed copies; every coordinate receives independent
// N(0, sigma^2) noise. Copy k draws from a stream derived from (seed, k).
std::vector<SkeletonSequence> augment_gaussian(const SkeletonSequence& seq,
                                               const AugmentationConfig& cfg);

struct ChannelScale {
  double min = 0.0;
  double max = 0.0;
  bool degenerate = false;
};

struct ScaledImage {
  ImageU8 pixels;
  std::vector<ChannelScale> scales;
};

// Per-channel min-max quantization to [0, 255]. Constant channels map to 0
// and are flagged degenerate.
ScaledImage scale_channels(const ImageF& image);

// Inverse affine map; exact up to half a quantization step.
ImageF unscale_channels(const ImageU8& pixels, const std::vector<ChannelScale>& scales);

}  // namespace skepxel
