#include "skepxel/pipeline.hpp"

#include "skepxel/parallel.hpp"
#include "skepxel/random.hpp"

namespace skepxel {

using nlohmann::json;

std::uint64_t stable_hash(std::string_view text) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

NormalizedSequence prepare_sequence(const SkeletonSequence& seq, const LayoutBlock& layout) {
  if (layout.pad.empty()) return normalize_pose(seq);
  return normalize_pose(pad_joints(seq, layout.encoded_joint_count(), layout.pad));
}

std::vector<SkeletonSequence> training_variants(const SkeletonSequence& prepared, Split split,
                                                const AugmentBlock& augment) {
  std::vector<SkeletonSequence> out{prepared};
  if (split != Split::kTrain || !augment.enabled || augment.params.copies == 0) return out;
  AugmentationConfig params = augment.params;
  params.seed = derive_seed(augment.params.seed, stable_hash(prepared.source_id));
  for (auto& copy : augment_gaussian(prepared, params)) out.push_back(std::move(copy));
  return out;
}

std::vector<SkeletalImage> encode_sequence(const SkeletonSequence& prepared,
                                           const ArrangementSet& set, const CodecBlock& codec) {
  const WindowPlan plan = plan_windows(prepared.size(), codec.n, codec.effective_stride());
  std::vector<SkeletalImage> images;
  images.reserve(plan.size());
  for (const auto& span : plan.windows) images.push_back(build_image(prepared, set, span, codec.kind));
  return images;
}

FeatureSeries image_feature_series(std::span<const SkeletalImage> images,
                                   const BaselineExtractor& extractor, std::string video_id,
                                   std::optional<std::string> label) {
  if (images.empty()) throw ValidationError("video '" + video_id + "' produced no images");
  FeatureSeries series;
  series.video_id = std::move(video_id);
  series.label = std::move(label);
  series.q = images.size();
  series.d = static_cast<std::size_t>(extractor.config().out_dim);
  series.values.reserve(series.q * series.d);
  for (const auto& img : images) {
    const auto feature = extractor.extract(img.data);
    series.values.insert(series.values.end(), feature.values.begin(), feature.values.end());
  }
  return series;
}

namespace {

std::vector<double> to_f32_precision(std::vector<double> values) {
  for (double& v : values) v = static_cast<float>(v);
  return values;
}

}  // namespace

std::vector<VideoDescriptor> describe(const FeatureSeries& series, Split split,
                                      const PyramidConfig& ftp, Granularity granularity) {
  series.validate();
  const std::string label = series.label.value_or("");
  std::vector<VideoDescriptor> out;
  if (granularity == Granularity::kVideo) {
    out.push_back({series.video_id, label, split,
                   to_f32_precision(ftp_encode(series, ftp).values)});
    return out;
  }
  for (std::size_t i = 0; i < series.q; ++i) {
    const auto row = series.row(i);
    out.push_back({series.video_id + "#" + std::to_string(i), label, split,
                   to_f32_precision({row.begin(), row.end()})});
  }
  return out;
}

std::string descriptors_to_json(std::span<const VideoDescriptor> descriptors,
                                const PyramidConfig& ftp, Granularity granularity) {
  json doc;
  doc["ftp"] = {{"levels", ftp.levels}, {"z", ftp.z}, {"min_series_len", ftp.min_series_len}};
  doc["granularity"] = granularity == Granularity::kVideo ? "video" : "image";
  json list = json::array();
  for (const auto& d : descriptors) {
    list.push_back({{"id", d.id},
                    {"label", d.label},
                    {"split", std::string(to_string(d.split))},
                    {"dim", d.values.size()},
                    {"values", encode_f32_base64(d.values)}});
  }
  doc["descriptors"] = std::move(list);
  return doc.dump();
}

std::vector<VideoDescriptor> descriptors_from_json(std::string_view text) {
  std::vector<VideoDescriptor> out;
  try {
    const json doc = json::parse(text);
    for (const auto& d : doc.at("descriptors")) {
      VideoDescriptor v;
      v.id = d.at("id").get<std::string>();
      v.label = d.at("label").get<std::string>();
      v.split = parse_split(d.at("split").get<std::string>());
      v.values = decode_f32_base64(d.at("values").get<std::string>());
      if (v.values.size() != d.at("dim").get<std::size_t>()) {
        throw ParseError("descriptor '" + v.id + "' length does not match its dim");
      }
      out.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed descriptor file: ") + e.what());
  }
  return out;
}

std::vector<LabeledDescriptor> labeled(std::span<const VideoDescriptor> descriptors, Split split) {
  std::vector<LabeledDescriptor> out;
  for (const auto& d : descriptors) {
    if (d.split == split) out.push_back({d.values, d.label});
  }
  return out;
}

ClassifierModel train_classifier(std::span<const VideoDescriptor> descriptors,
                                 const RecognizerBlock& recognizer) {
  auto train = labeled(descriptors, Split::kTrain);
  if (train.empty()) throw ValidationError("no training descriptors");
  if (recognizer.classifier == "ridge") return ridge_train(train, recognizer.lambda);
  return knn_train(std::move(train), recognizer.k);
}

ExperimentResult run_experiment(const DatasetManifest& manifest,
                                std::span<const SkeletonSequence> sequences,
                                const ArrangementSet& set, const PipelineConfig& cfg) {
  cfg.validate();
  if (sequences.size() != manifest.entries.size()) {
    throw ValidationError("sequence count does not match manifest entries");
  }
  const BaselineExtractor extractor(cfg.recognizer.extractor);

  // Slot i holds every descriptor produced from manifest entry i.
  std::vector<std::vector<VideoDescriptor>> slots(sequences.size());
  std::vector<std::size_t> image_counts(sequences.size(), 0);
  parallel_for(sequences.size(), cfg.workers, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    SkeletonSequence seq = sequences[i];
    seq.label = entry.label;
    const auto prepared = prepare_sequence(seq, cfg.layout).sequence;
    for (const auto& variant : training_variants(prepared, entry.split, cfg.augment)) {
      const auto images = encode_sequence(variant, set, cfg.codec);
      image_counts[i] += images.size();
      const auto series = image_feature_series(images, extractor, variant.source_id, entry.label);
      for (auto& d : describe(series, entry.split, cfg.ftp, cfg.recognizer.granularity)) {
        slots[i].push_back(std::move(d));
      }
    }
  });

  ExperimentResult result;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    result.images += image_counts[i];
    for (auto& d : slots[i]) result.descriptors.push_back(std::move(d));
  }
  result.model = train_classifier(result.descriptors, cfg.recognizer);
  const auto test = labeled(result.descriptors, Split::kTest);
  result.report = evaluate(result.model, test);
  return result;
}

}  // namespace skepxel
