#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skepxel/arrangement.hpp"
#include "skepxel/codec.hpp"
#include "skepxel/config.hpp"
#include "skepxel/ftp.hpp"
#include "skepxel/normalization.hpp"
#include "skepxel/recognizer.hpp"
#include "skepxel/skeleton.hpp"

namespace skepxel {

// Optional joint padding followed by pose normalization.
NormalizedSequence prepare_sequence(const SkeletonSequence& seq, const LayoutBlock& layout);

// The prepared sequence itself, plus Gaussian copies for training videos
// when augmentation is enabled. Copy seeds derive from the augmentation
// seed and the video id, so results do not depend on processing order.
std::vector<SkeletonSequence> training_variants(const SkeletonSequence& prepared, Split split,
                                                const AugmentBlock& augment);

// One image per planned window.
std::vector<SkeletalImage> encode_sequence(const SkeletonSequence& prepared,
                                           const ArrangementSet& set, const CodecBlock& codec);

FeatureSeries image_feature_series(std::span<const SkeletalImage> images,
                                   const BaselineExtractor& extractor, std::string video_id,
                                   std::optional<std::string> label);

struct VideoDescriptor {
  std::string id;
  std::string label;
  Split split = Split::kTrain;
  // Stored at f32 precision so files reproduce in-memory results exactly.
  std::vector<double> values;

  friend bool operator==(const VideoDescriptor&, const VideoDescriptor&) = default;
};

// Video granularity: one FTP descriptor. Image granularity: one descriptor
// per feature row.
std::vector<VideoDescriptor> describe(const FeatureSeries& series, Split split,
                                      const PyramidConfig& ftp, Granularity granularity);

std::string descriptors_to_json(std::span<const VideoDescriptor> descriptors,
                                const PyramidConfig& ftp, Granularity granularity);
std::vector<VideoDescriptor> descriptors_from_json(std::string_view text);

std::vector<LabeledDescriptor> labeled(std::span<const VideoDescriptor> descriptors, Split split);

ClassifierModel train_classifier(std::span<const VideoDescriptor> descriptors,
                                 const RecognizerBlock& recognizer);

struct ExperimentResult {
  std::vector<VideoDescriptor> descriptors;
  ClassifierModel model;
  EvalReport report;
  std::size_t images = 0;
};

// In-memory run of encode -> features -> descriptors -> train -> evaluate
// over the given sequences (parallel to manifest.entries), using
// cfg.workers threads.
ExperimentResult run_experiment(const DatasetManifest& manifest,
                                std::span<const SkeletonSequence> sequences,
                                const ArrangementSet& set, const PipelineConfig& cfg);

// Stable 64-bit hash of a string (FNV-1a).
std::uint64_t stable_hash(std::string_view text) noexcept;

}  // namespace skepxel
