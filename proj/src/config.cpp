#include "skepxel/config.hpp"

#include <set>
#include <sstream>

#include <toml.hpp>

namespace skepxel {

using nlohmann::json;

namespace {

void reject_unknown(const json& block, std::string_view name,
                    std::initializer_list<std::string_view> allowed) {
  if (!block.is_object()) {
    throw ValidationError("config block '" + std::string(name) + "' must be a table");
  }
  const std::set<std::string_view> keys(allowed);
  for (const auto& [key, value] : block.items()) {
    if (!keys.contains(key)) {
      throw ValidationError("unknown config key '" + std::string(name) + "." + key + "'");
    }
  }
}

template <typename T>
void read(const json& block, const char* key, T& out) {
  if (block.contains(key)) out = block.at(key).get<T>();
}

}  // namespace

void PipelineConfig::validate() const {
  layout.layout.validate();
  if (arrangement.h < 1 || arrangement.w < 1 || arrangement.m < 1) {
    throw ValidationError("arrangement h, w and m must be >= 1");
  }
  const int joints = layout.encoded_joint_count();
  if (arrangement.h * arrangement.w != joints) {
    throw ValidationError("arrangement h*w = " + std::to_string(arrangement.h * arrangement.w) +
                          " does not equal the encoded joint count " + std::to_string(joints));
  }
  if (arrangement.max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
  if (codec.n < 2) throw ValidationError("codec n must be >= 2");
  if (codec.effective_stride() < 1) throw ValidationError("codec stride must be >= 1");
  if (codec.image_height && *codec.image_height != arrangement.m * arrangement.h) {
    throw ValidationError("image height " + std::to_string(*codec.image_height) +
                          " != m*h = " + std::to_string(arrangement.m * arrangement.h));
  }
  if (codec.image_width && *codec.image_width != codec.n * arrangement.w) {
    throw ValidationError("image width " + std::to_string(*codec.image_width) +
                          " != n*w = " + std::to_string(codec.n * arrangement.w));
  }
  augment.params.validate();
  ftp.validate();
  recognizer.extractor.validate();
  if (recognizer.classifier != "knn" && recognizer.classifier != "ridge") {
    throw ValidationError("classifier must be knn or ridge");
  }
  if (recognizer.k < 1) throw ValidationError("knn k must be >= 1");
  if (!(recognizer.lambda > 0.0)) throw ValidationError("ridge lambda must be > 0");
  if (workers < 1) throw ValidationError("workers must be >= 1");
}

PipelineConfig config_from_json(const json& doc) {
  PipelineConfig cfg;
  try {
    reject_unknown(doc, "<root>",
                   {"workers", "layout", "arrangement", "codec", "augment", "ftp", "recognizer",
                    "paths"});
    read(doc, "workers", cfg.workers);

    if (doc.contains("layout")) {
      const auto& b = doc["layout"];
      reject_unknown(b, "layout", {"joints", "hip", "left_shoulder", "right_shoulder", "name", "pad"});
      int joints = cfg.layout.layout.joint_count;
      read(b, "joints", joints);
      cfg.layout.layout = SkeletonLayout::generic(joints);
      read(b, "hip", cfg.layout.layout.hip);
      read(b, "left_shoulder", cfg.layout.layout.left_shoulder);
      read(b, "right_shoulder", cfg.layout.layout.right_shoulder);
      read(b, "name", cfg.layout.layout.name);
      if (b.contains("pad")) {
        for (const auto& pair : b["pad"]) {
          cfg.layout.pad.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
        }
      }
    }
    if (doc.contains("arrangement")) {
      const auto& b = doc["arrangement"];
      reject_unknown(b, "arrangement", {"h", "w", "m", "gamma_t", "seed", "max_attempts"});
      read(b, "h", cfg.arrangement.h);
      read(b, "w", cfg.arrangement.w);
      read(b, "m", cfg.arrangement.m);
      read(b, "seed", cfg.arrangement.seed);
      read(b, "max_attempts", cfg.arrangement.max_attempts);
      if (b.contains("gamma_t")) {
        const auto& g = b["gamma_t"];
        if (g.is_string()) {
          if (g.get<std::string>() != "auto") {
            throw ValidationError("arrangement.gamma_t must be a number or \"auto\"");
          }
          cfg.arrangement.gamma_t.reset();
        } else {
          cfg.arrangement.gamma_t = g.get<double>();
        }
      }
    }
    if (doc.contains("codec")) {
      const auto& b = doc["codec"];
      reject_unknown(b, "codec", {"n", "stride", "kind", "export", "image_height", "image_width"});
      read(b, "n", cfg.codec.n);
      if (b.contains("stride")) cfg.codec.stride = b["stride"].get<int>();
      if (b.contains("kind")) cfg.codec.kind = parse_image_kind(b["kind"].get<std::string>());
      if (b.contains("export")) {
        cfg.codec.export_mode = parse_export_mode(b["export"].get<std::string>());
      }
      if (b.contains("image_height")) cfg.codec.image_height = b["image_height"].get<int>();
      if (b.contains("image_width")) cfg.codec.image_width = b["image_width"].get<int>();
    }
    if (doc.contains("augment")) {
      const auto& b = doc["augment"];
      reject_unknown(b, "augment", {"enabled", "sigma", "copies", "seed"});
      read(b, "enabled", cfg.augment.enabled);
      read(b, "sigma", cfg.augment.params.sigma);
      read(b, "copies", cfg.augment.params.copies);
      read(b, "seed", cfg.augment.params.seed);
    }
    if (doc.contains("ftp")) {
      const auto& b = doc["ftp"];
      reject_unknown(b, "ftp", {"levels", "z", "min_series_len"});
      read(b, "levels", cfg.ftp.levels);
      read(b, "z", cfg.ftp.z);
      read(b, "min_series_len", cfg.ftp.min_series_len);
    }
    if (doc.contains("recognizer")) {
      const auto& b = doc["recognizer"];
      reject_unknown(b, "recognizer",
                     {"pool_h", "pool_w", "dim", "seed", "classifier", "k", "lambda", "granularity"});
      read(b, "pool_h", cfg.recognizer.extractor.pool_h);
      read(b, "pool_w", cfg.recognizer.extractor.pool_w);
      read(b, "dim", cfg.recognizer.extractor.out_dim);
      read(b, "seed", cfg.recognizer.extractor.seed);
      read(b, "classifier", cfg.recognizer.classifier);
      read(b, "k", cfg.recognizer.k);
      read(b, "lambda", cfg.recognizer.lambda);
      if (b.contains("granularity")) {
        const auto g = b["granularity"].get<std::string>();
        if (g == "video") {
          cfg.recognizer.granularity = Granularity::kVideo;
        } else if (g == "image") {
          cfg.recognizer.granularity = Granularity::kImage;
        } else {
          throw ValidationError("recognizer.granularity must be video or image");
        }
      }
    }
    if (doc.contains("paths")) {
      const auto& b = doc["paths"];
      reject_unknown(b, "paths", {"manifest", "arrangement", "images", "features", "descriptors",
                                  "model", "report"});
      auto path = [&](const char* key, std::filesystem::path& out) {
        if (b.contains(key)) out = b[key].get<std::string>();
      };
      path("manifest", cfg.paths.manifest);
      path("arrangement", cfg.paths.arrangement);
      path("images", cfg.paths.images);
      path("features", cfg.paths.features);
      path("descriptors", cfg.paths.descriptors);
      path("model", cfg.paths.model);
      path("report", cfg.paths.report);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
  return cfg;
}

PipelineConfig config_from_toml(std::string_view text) {
  toml::table table;
  try {
    table = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "invalid TOML config: " << e.description();
    throw ParseError(msg.str(), e.source().begin.line);
  }
  std::ostringstream as_json;
  as_json << toml::json_formatter{table};
  return config_from_json(json::parse(as_json.str()));
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (path.extension() == ".toml") return config_from_toml(text);
  try {
    return config_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON config: ") + e.what());
  }
}

json to_json(const PipelineConfig& cfg) {
  json doc;
  doc["workers"] = cfg.workers;
  json pad = json::array();
  for (const auto& [a, b] : cfg.layout.pad) pad.push_back({a, b});
  doc["layout"] = {{"joints", cfg.layout.layout.joint_count},
                   {"hip", cfg.layout.layout.hip},
                   {"left_shoulder", cfg.layout.layout.left_shoulder},
                   {"right_shoulder", cfg.layout.layout.right_shoulder},
                   {"name", cfg.layout.layout.name},
                   {"pad", pad}};
  doc["arrangement"] = {{"h", cfg.arrangement.h},
                        {"w", cfg.arrangement.w},
                        {"m", cfg.arrangement.m},
                        {"gamma_t", cfg.arrangement.gamma_t ? json(*cfg.arrangement.gamma_t)
                                                            : json("auto")},
                        {"seed", cfg.arrangement.seed},
                        {"max_attempts", cfg.arrangement.max_attempts}};
  doc["codec"] = {{"n", cfg.codec.n},
                  {"stride", cfg.codec.effective_stride()},
                  {"kind", std::string(to_string(cfg.codec.kind))},
                  {"export", std::string(to_string(cfg.codec.export_mode))}};
  if (cfg.codec.image_height) doc["codec"]["image_height"] = *cfg.codec.image_height;
  if (cfg.codec.image_width) doc["codec"]["image_width"] = *cfg.codec.image_width;
  doc["augment"] = {{"enabled", cfg.augment.enabled},
                    {"sigma", cfg.augment.params.sigma},
                    {"copies", cfg.augment.params.copies},
                    {"seed", cfg.augment.params.seed}};
  doc["ftp"] = {{"levels", cfg.ftp.levels},
                {"z", cfg.ftp.z},
                {"min_series_len", cfg.ftp.min_series_len}};
  doc["recognizer"] = {
      {"pool_h", cfg.recognizer.extractor.pool_h},
      {"pool_w", cfg.recognizer.extractor.pool_w},
      {"dim", cfg.recognizer.extractor.out_dim},
      {"seed", cfg.recognizer.extractor.seed},
      {"classifier", cfg.recognizer.classifier},
      {"k", cfg.recognizer.k},
      {"lambda", cfg.recognizer.lambda},
      {"granularity", cfg.recognizer.granularity == Granularity::kVideo ? "video" : "image"}};
  doc["paths"] = {{"manifest", cfg.paths.manifest.string()},
                  {"arrangement", cfg.paths.arrangement.string()},
                  {"images", cfg.paths.images.string()},
                  {"features", cfg.paths.features.string()},
                  {"descriptors", cfg.paths.descriptors.string()},
                  {"model", cfg.paths.model.string()},
                  {"report", cfg.paths.report.string()}};
  return doc;
}

}  // namespace skepxel
