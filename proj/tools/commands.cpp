#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

#include <json.hpp>

#include "skepxel/arrangement.hpp"
#include "skepxel/codec.hpp"
#include "skepxel/ftp.hpp"
#include "skepxel/parallel.hpp"
#include "skepxel/pipeline.hpp"
#include "skepxel/recognizer.hpp"

namespace skepxel::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parse_json_file(const fs::path& path) {
  if (!fs::exists(path)) throw Error("missing upstream artifact '" + path.string() + "'");
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

ArrangementSet load_arrangement(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error("missing arrangement set '" + path.string() + "' (run `skepxel arrange` first)");
  }
  return arrangement_set_from_json(read_text_file(path));
}

// Manifest-relative path flattened into a collision-free identifier.
std::string video_id_for(const std::string& entry_path) {
  fs::path p(entry_path);
  std::string id = (p.parent_path() / p.stem()).generic_string();
  std::replace(id.begin(), id.end(), '/', '_');
  return id;
}

std::string window_stem(const std::string& video_id, const WindowSpan& span) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_w%05lld", static_cast<long long>(span.start));
  return video_id + buf;
}

}  // namespace

int cmd_arrange(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  GenerateOptions opts;
  opts.h = cfg.arrangement.h;
  opts.w = cfg.arrangement.w;
  opts.m = cfg.arrangement.m;
  opts.gamma_t = cfg.arrangement.gamma_t;
  opts.seed = cfg.arrangement.seed;
  opts.max_attempts = cfg.arrangement.max_attempts;
  opts.workers = cfg.workers;
  try {
    const ArrangementSet set = generate_set(opts);
    write_text_file(cfg.paths.arrangement, to_json(set));
    log << "arrange: " << set.h() << "x" << set.w() << ", m=" << set.m() << ", gamma=" << set.gamma
        << " > gamma_t=" << set.gamma_t << " after " << set.attempts << " attempts -> "
        << cfg.paths.arrangement.string() << "\n";
    return 0;
  } catch (const GenerationError& e) {
    log << "arrange: " << e.what() << "\n"
        << "arrange: lower arrangement.gamma_t below " << e.best_gamma()
        << " or raise max_attempts\n";
    return 3;
  }
}

int cmd_encode(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path manifest_path = cfg.paths.manifest;
  if (!fs::exists(manifest_path)) {
    throw Error("missing manifest '" + manifest_path.string() + "'");
  }
  const DatasetManifest manifest = parse_manifest(read_text_file(manifest_path));
  if (manifest.layout.joint_count != cfg.layout.layout.joint_count) {
    throw ValidationError("manifest layout has " + std::to_string(manifest.layout.joint_count) +
                          " joints, config expects " +
                          std::to_string(cfg.layout.layout.joint_count));
  }
  const ArrangementSet set = load_arrangement(cfg.paths.arrangement);
  if (set.h() != cfg.arrangement.h || set.w() != cfg.arrangement.w ||
      set.m() != cfg.arrangement.m) {
    throw ValidationError("arrangement set shape does not match the config");
  }
  const fs::path base = manifest_path.parent_path();
  const fs::path out_dir = cfg.paths.images;
  fs::create_directories(out_dir);

  struct VideoOut {
    json videos = json::array();
    std::string error;
  };
  std::vector<VideoOut> slots(manifest.entries.size());
  std::mutex log_mutex;

  parallel_for(manifest.entries.size(), cfg.workers, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    try {
      SkeletonSequence seq = load_sequence(base / entry.path, manifest.layout);
      seq.label = entry.label;
      seq.source_id = video_id_for(entry.path);
      const auto normalized = prepare_sequence(seq, cfg.layout);
      if (!normalized.degenerate_frames.empty()) {
        std::lock_guard lock(log_mutex);
        log << "encode: warning: " << entry.path << ": " << normalized.degenerate_frames.size()
            << " frame(s) with degenerate shoulder vector"
            << (normalized.first_frame_identity ? " (first frame left unrotated)" : "") << "\n";
      }
      for (const auto& variant : training_variants(normalized.sequence, entry.split, cfg.augment)) {
        const auto images = encode_sequence(variant, set, cfg.codec);
        json names = json::array();
        for (const auto& img : images) {
          ImageMetadata meta;
          meta.source = variant.source_id;
          meta.label = entry.label;
          meta.stride = cfg.codec.effective_stride();
          meta.fps = variant.fps;
          const std::string stem = window_stem(variant.source_id, img.window);
          const auto files = export_image(img, meta, cfg.codec.export_mode, out_dir, stem);
          names.push_back(files.sidecar.filename().string());
        }
        slots[i].videos.push_back({{"id", variant.source_id},
                                   {"source", entry.path},
                                   {"label", entry.label},
                                   {"split", std::string(to_string(entry.split))},
                                   {"augmented", variant.source_id != seq.source_id},
                                   {"fps", variant.fps},
                                   {"q", images.size()},
                                   {"images", std::move(names)}});
      }
    } catch (const std::exception& e) {
      slots[i].error = e.what();
      std::lock_guard lock(log_mutex);
      log << "encode: error: " << entry.path << ": " << e.what() << "\n";
    }
  });

  json summary;
  summary["config"] = to_json(cfg);
  summary["arrangement_set"] = set.id();
  json videos = json::array();
  json failures = json::array();
  std::size_t image_count = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].error.empty()) {
      failures.push_back({{"path", manifest.entries[i].path}, {"error", slots[i].error}});
      continue;
    }
    for (auto& v : slots[i].videos) {
      image_count += v["q"].get<std::size_t>();
      videos.push_back(std::move(v));
    }
  }
  summary["counts"] = {{"videos", videos.size()},
                       {"images", image_count},
                       {"failures", failures.size()}};
  summary["videos"] = std::move(videos);
  summary["failures"] = failures;
  write_text_file(out_dir / kEncodeSummary, summary.dump(2));
  log << "encode: " << summary["counts"]["videos"] << " videos, " << image_count << " images, "
      << failures.size() << " failures -> " << out_dir.string() << "\n";
  return failures.empty() ? 0 : 2;
}

int cmd_features(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path image_dir = cfg.paths.images;
  const json summary = parse_json_file(image_dir / kEncodeSummary);
  const fs::path out_dir = cfg.paths.features;
  fs::create_directories(out_dir);
  const BaselineExtractor extractor(cfg.recognizer.extractor);

  const auto& videos = summary.at("videos");
  std::vector<json> rows(videos.size());
  parallel_for(videos.size(), cfg.workers, [&](std::size_t i) {
    const auto& v = videos[i];
    std::vector<SkeletalImage> images;
    for (const auto& name : v.at("images")) {
      images.push_back(import_image(image_dir / name.get<std::string>()));
    }
    const auto id = v.at("id").get<std::string>();
    const auto label = v.at("label").get<std::string>();
    const FeatureSeries series = image_feature_series(images, extractor, id, label);
    const fs::path file = out_dir / (id + ".fser");
    save_features(series, file);
    rows[i] = {{"id", id},
               {"label", label},
               {"split", v.at("split")},
               {"file", file.filename().string()},
               {"q", series.q},
               {"d", series.d}};
  });

  json index;
  index["config"] = to_json(cfg)["recognizer"];
  index["videos"] = rows;
  write_text_file(out_dir / kFeaturesIndex, index.dump(2));
  log << "features: " << rows.size() << " series of D=" << cfg.recognizer.extractor.out_dim
      << " -> " << out_dir.string() << "\n";
  return 0;
}

int cmd_ftp(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path source = cfg.paths.features;
  struct Item {
    fs::path file;
    Split split = Split::kTrain;
    std::optional<std::string> label;
  };
  std::vector<Item> items;
  if (fs::is_directory(source) && fs::exists(source / kFeaturesIndex)) {
    const json index = parse_json_file(source / kFeaturesIndex);
    for (const auto& v : index.at("videos")) {
      items.push_back({source / v.at("file").get<std::string>(),
                       parse_split(v.at("split").get<std::string>()),
                       v.at("label").get<std::string>()});
    }
  } else if (fs::is_directory(source)) {
    // External features: every *.fser in the directory, split from the sidecar.
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(source)) {
      if (e.path().extension() == ".fser") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      Item item{f, Split::kTrain, std::nullopt};
      const fs::path sidecar = f.string() + ".json";
      if (fs::exists(sidecar)) {
        const json side = parse_json_file(sidecar);
        if (side.contains("split")) item.split = parse_split(side["split"].get<std::string>());
      }
      items.push_back(item);
    }
  } else if (fs::exists(source)) {
    items.push_back({source, Split::kTrain, std::nullopt});
  } else {
    throw Error("missing feature input '" + source.string() + "'");
  }
  if (items.empty()) throw Error("no feature series found under '" + source.string() + "'");

  std::vector<std::vector<VideoDescriptor>> slots(items.size());
  parallel_for(items.size(), cfg.workers, [&](std::size_t i) {
    FeatureSeries series = load_external_features(items[i].file);
    if (items[i].label) series.label = items[i].label;
    slots[i] = describe(series, items[i].split, cfg.ftp, cfg.recognizer.granularity);
  });
  std::vector<VideoDescriptor> all;
  for (auto& s : slots) {
    for (auto& d : s) all.push_back(std::move(d));
  }
  json doc = json::parse(descriptors_to_json(all, cfg.ftp, cfg.recognizer.granularity));
  doc["config"] = to_json(cfg)["ftp"];
  write_text_file(cfg.paths.descriptors, doc.dump());
  log << "ftp: " << all.size() << " descriptors of length " << all.front().values.size()
      << " -> " << cfg.paths.descriptors.string() << "\n";
  return 0;
}

int cmd_train(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (!fs::exists(cfg.paths.descriptors)) {
    throw Error("missing descriptors '" + cfg.paths.descriptors.string() + "'");
  }
  const auto descriptors = descriptors_from_json(read_text_file(cfg.paths.descriptors));
  const ClassifierModel model = train_classifier(descriptors, cfg.recognizer);
  json doc = json::parse(to_json(model));
  doc["config"] = to_json(cfg)["recognizer"];
  write_text_file(cfg.paths.model, doc.dump());
  log << "train: " << cfg.recognizer.classifier << " on " << labeled(descriptors, Split::kTrain).size()
      << " descriptors, " << model_classes(model).size() << " classes -> "
      << cfg.paths.model.string() << "\n";
  return 0;
}

int cmd_eval(const PipelineConfig& cfg, std::ostream& out, std::ostream& log) {
  cfg.validate();
  if (!fs::exists(cfg.paths.model)) throw Error("missing model '" + cfg.paths.model.string() + "'");
  if (!fs::exists(cfg.paths.descriptors)) {
    throw Error("missing descriptors '" + cfg.paths.descriptors.string() + "'");
  }
  const ClassifierModel model = classifier_from_json(read_text_file(cfg.paths.model));
  const auto descriptors = descriptors_from_json(read_text_file(cfg.paths.descriptors));
  const auto test = labeled(descriptors, Split::kTest);
  const EvalReport report = evaluate(model, test);
  json doc = json::parse(to_json(report));
  doc["config"] = to_json(cfg)["recognizer"];
  write_text_file(cfg.paths.report, doc.dump(2));
  out << to_text(report);
  log << "eval: accuracy " << report.accuracy << " -> " << cfg.paths.report.string() << "\n";
  return 0;
}

int cmd_synth(const SynthOptions& opts, std::ostream& log) {
  const SynthDataset data = synth_actions(opts.synth);
  fs::create_directories(opts.out_dir);
  for (std::size_t i = 0; i < data.sequences.size(); ++i) {
    write_text_file(opts.out_dir / data.manifest.entries[i].path,
                    to_generic_json(data.sequences[i]));
  }
  write_text_file(opts.out_dir / "manifest.json", to_manifest_json(data.manifest));
  log << "synth: " << data.sequences.size() << " sequences (" << opts.synth.classes
      << " classes) -> " << opts.out_dir.string() << "\n";
  return 0;
}

namespace {

void shorten_strings(json& node) {
  if (node.is_string() && node.get_ref<const std::string&>().size() > 96) {
    node = "<" + std::to_string(node.get_ref<const std::string&>().size()) + " chars>";
  } else if (node.is_structured()) {
    for (auto& child : node) shorten_strings(child);
  }
}

}  // namespace

int cmd_inspect(const fs::path& path, std::ostream& out) {
  if (!fs::exists(path)) throw Error("no such file '" + path.string() + "'");
  const auto ext = path.extension().string();
  if (ext == ".skpx") {
    const ImageF img = decode_raw(read_binary_file(path));
    out << "SKPX raw image: H=" << img.height() << " W=" << img.width() << " C=" << img.channels()
        << "\n";
    return 0;
  }
  if (ext == ".fser") {
    const FeatureSeries s = load_external_features(path);
    out << "FSER feature series: Q=" << s.q << " D=" << s.d << " video=" << s.video_id
        << " label=" << s.label.value_or("-") << "\n";
    return 0;
  }
  if (ext == ".png") {
    const ImageU8 img = decode_png(read_binary_file(path));
    out << "PNG: " << img.width() << "x" << img.height() << " RGB8\n";
    return 0;
  }
  if (ext == ".skeleton") {
    const auto tracks = parse_ntu_skeleton(read_text_file(path), SkeletonLayout::ntu25(),
                                           path.stem().string());
    out << "NTU skeleton: " << tracks.size() << " body track(s)\n";
    for (const auto& t : tracks) out << "  " << t.source_id << ": " << t.size() << " frames\n";
    return 0;
  }
  json doc = parse_json_file(path);
  shorten_strings(doc);
  if (doc.is_object() && doc.contains("frames") && doc["frames"].is_array()) {
    const std::size_t frames = doc["frames"].size();
    doc["frames"] = "<" + std::to_string(frames) + " frames>";
  }
  out << doc.dump(2) << "\n";
  return 0;
}

}  // namespace skepxel::cli
