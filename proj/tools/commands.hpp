#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "skepxel/config.hpp"

namespace skepxel::cli {

// Each command reads its inputs from cfg.paths, writes its artifacts, logs
// progress to `log` and returns a process exit code.

int cmd_arrange(const PipelineConfig& cfg, std::ostream& log);
int cmd_encode(const PipelineConfig& cfg, std::ostream& log);
int cmd_features(const PipelineConfig& cfg, std::ostream& log);
int cmd_ftp(const PipelineConfig& cfg, std::ostream& log);
int cmd_train(const PipelineConfig& cfg, std::ostream& log);
// Prints the text report to `out`.
int cmd_eval(const PipelineConfig& cfg, std::ostream& out, std::ostream& log);

struct SynthOptions {
  SynthConfig synth;
  std::filesystem::path out_dir = "synth";
};

// Writes one generic JSON file per sequence and manifest.json.
int cmd_synth(const SynthOptions& opts, std::ostream& log);

int cmd_inspect(const std::filesystem::path& path, std::ostream& out);

inline constexpr const char* kEncodeSummary = "encode_summary.json";
inline constexpr const char* kFeaturesIndex = "features_index.json";

}  // namespace skepxel::cli
