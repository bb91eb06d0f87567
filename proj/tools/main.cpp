// skepxel: encode skeleton sequences into Skepxel images and FTP descriptors.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "skepxel/config.hpp"

namespace {

using skepxel::PipelineConfig;

template <typename T, typename U>
void override(const std::optional<T>& flag, U& target) {
  if (flag) target = *flag;
}

struct Flags {
  std::optional<std::string> config;
  std::optional<unsigned> workers;

  // paths
  std::optional<std::string> manifest, arrangement, images, features, descriptors, model, report;
  // arrangement
  std::optional<int> h, w, m;
  std::optional<std::string> gamma_t;
  std::optional<std::uint64_t> arr_seed, max_attempts;
  // codec
  std::optional<int> n, stride;
  std::optional<std::string> kind, export_mode;
  // augmentation
  bool no_augment = false;
  std::optional<double> sigma;
  std::optional<int> copies;
  std::optional<std::uint64_t> aug_seed;
  // ftp
  std::optional<int> levels, z, min_series_len;
  std::optional<std::string> granularity;
  // recognizer
  std::optional<int> pool_h, pool_w, dim, k;
  std::optional<std::uint64_t> extractor_seed;
  std::optional<std::string> classifier;
  std::optional<double> lambda;
};

PipelineConfig resolve(const Flags& f) {
  PipelineConfig cfg = f.config ? skepxel::load_config(*f.config) : PipelineConfig{};
  override(f.workers, cfg.workers);
  if (f.manifest) cfg.paths.manifest = *f.manifest;
  if (f.arrangement) cfg.paths.arrangement = *f.arrangement;
  if (f.images) cfg.paths.images = *f.images;
  if (f.features) cfg.paths.features = *f.features;
  if (f.descriptors) cfg.paths.descriptors = *f.descriptors;
  if (f.model) cfg.paths.model = *f.model;
  if (f.report) cfg.paths.report = *f.report;

  override(f.h, cfg.arrangement.h);
  override(f.w, cfg.arrangement.w);
  override(f.m, cfg.arrangement.m);
  if (f.gamma_t) {
    if (*f.gamma_t == "auto") {
      cfg.arrangement.gamma_t.reset();
    } else {
      cfg.arrangement.gamma_t = std::stod(*f.gamma_t);
    }
  }
  override(f.arr_seed, cfg.arrangement.seed);
  override(f.max_attempts, cfg.arrangement.max_attempts);

  override(f.n, cfg.codec.n);
  if (f.stride) cfg.codec.stride = *f.stride;
  if (f.kind) cfg.codec.kind = skepxel::parse_image_kind(*f.kind);
  if (f.export_mode) cfg.codec.export_mode = skepxel::parse_export_mode(*f.export_mode);

  if (f.no_augment) cfg.augment.enabled = false;
  override(f.sigma, cfg.augment.params.sigma);
  override(f.copies, cfg.augment.params.copies);
  override(f.aug_seed, cfg.augment.params.seed);

  override(f.levels, cfg.ftp.levels);
  override(f.z, cfg.ftp.z);
  override(f.min_series_len, cfg.ftp.min_series_len);
  if (f.granularity) {
    cfg.recognizer.granularity = *f.granularity == "image" ? skepxel::Granularity::kImage
                                                           : skepxel::Granularity::kVideo;
  }

  override(f.pool_h, cfg.recognizer.extractor.pool_h);
  override(f.pool_w, cfg.recognizer.extractor.pool_w);
  override(f.dim, cfg.recognizer.extractor.out_dim);
  override(f.extractor_seed, cfg.recognizer.extractor.seed);
  override(f.classifier, cfg.recognizer.classifier);
  override(f.k, cfg.recognizer.k);
  override(f.lambda, cfg.recognizer.lambda);
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "TOML or JSON pipeline config");
  app->add_option("--workers", f.workers, "Worker threads");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skeleton-to-image encoding, FTP descriptors and a classification harness"};
  app.require_subcommand(1);
  Flags f;

  auto* arrange = app.add_subcommand("arrange", "Generate a joint arrangement set");
  add_common(arrange, f);
  arrange->add_option("--out", f.arrangement, "Arrangement set file");
  arrange->add_option("--height", f.h, "Skepxel height");
  arrange->add_option("--width", f.w, "Skepxel width");
  arrange->add_option("--m", f.m, "Skepxels per frame");
  arrange->add_option("--gamma-t", f.gamma_t, "Acceptance threshold or 'auto'");
  arrange->add_option("--seed", f.arr_seed, "Sampling seed");
  arrange->add_option("--max-attempts", f.max_attempts, "Rejection sampling budget");

  auto* encode = app.add_subcommand("encode", "Encode manifest sequences into skeletal images");
  add_common(encode, f);
  encode->add_option("--manifest", f.manifest, "Dataset manifest");
  encode->add_option("--arrangement", f.arrangement, "Arrangement set file");
  encode->add_option("--out-dir", f.images, "Image output directory");
  encode->add_option("--n", f.n, "Frames per image");
  encode->add_option("--stride", f.stride, "Window stride in frames");
  encode->add_option("--kind", f.kind, "location | velocity | locvel");
  encode->add_option("--export", f.export_mode, "raw-f32 | png8");
  encode->add_flag("--no-augment", f.no_augment, "Skip Gaussian augmentation of training videos");
  encode->add_option("--sigma", f.sigma, "Augmentation standard deviation");
  encode->add_option("--copies", f.copies, "Augmented copies per training video");
  encode->add_option("--aug-seed", f.aug_seed, "Augmentation seed");

  auto* features = app.add_subcommand("features", "Extract baseline per-image features");
  add_common(features, f);
  features->add_option("--images", f.images, "Directory written by encode");
  features->add_option("--out-dir", f.features, "Feature output directory");
  features->add_option("--pool-h", f.pool_h, "Pooling grid height");
  features->add_option("--pool-w", f.pool_w, "Pooling grid width");
  features->add_option("--dim", f.dim, "Projected feature dimension");
  features->add_option("--seed", f.extractor_seed, "Projection seed");

  auto* ftp = app.add_subcommand("ftp", "Fourier Temporal Pyramid descriptors per video");
  add_common(ftp, f);
  ftp->add_option("--features", f.features, "Feature directory or .fser file");
  ftp->add_option("--out", f.descriptors, "Descriptor file");
  ftp->add_option("--levels", f.levels, "Pyramid levels");
  ftp->add_option("--z", f.z, "Low-frequency components kept per segment");
  ftp->add_option("--min-series-len", f.min_series_len, "Rows short series are stretched to");
  ftp->add_option("--granularity", f.granularity, "video | image")
      ->check(CLI::IsMember({"video", "image"}));

  auto* train = app.add_subcommand("train", "Train a classifier on training descriptors");
  add_common(train, f);
  train->add_option("--descriptors", f.descriptors, "Descriptor file");
  train->add_option("--out", f.model, "Model file");
  train->add_option("--classifier", f.classifier, "knn | ridge")
      ->check(CLI::IsMember({"knn", "ridge"}));
  train->add_option("--k", f.k, "Neighbours for knn");
  train->add_option("--lambda", f.lambda, "Ridge regularizer");

  auto* eval = app.add_subcommand("eval", "Evaluate a model on test descriptors");
  add_common(eval, f);
  eval->add_option("--model", f.model, "Model file");
  eval->add_option("--descriptors", f.descriptors, "Descriptor file");
  eval->add_option("--out", f.report, "Report file");

  skepxel::cli::SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labelled action dataset");
  synth->add_option("--out-dir", synth_opts.out_dir, "Output directory");
  synth->add_option("--classes", synth_opts.synth.classes, "Number of classes");
  synth->add_option("--per-class", synth_opts.synth.per_class, "Sequences per class");
  synth->add_option("--train-per-class", synth_opts.synth.train_per_class,
                    "Training sequences per class");
  synth->add_option("--frames", synth_opts.synth.frames, "Frames per sequence");
  synth->add_option("--joints", synth_opts.synth.joints, "Joints per frame");
  synth->add_option("--seed", synth_opts.synth.seed, "Generator seed");
  synth->add_option("--noise", synth_opts.synth.noise, "Per-coordinate jitter");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Print an artifact's header or metadata");
  inspect->add_option("path", inspect_path, "Artifact file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    namespace cli = skepxel::cli;
    if (*synth) return cli::cmd_synth(synth_opts, std::cerr);
    if (*inspect) return cli::cmd_inspect(inspect_path, std::cout);
    const PipelineConfig cfg = resolve(f);
    if (*arrange) return cli::cmd_arrange(cfg, std::cerr);
    if (*encode) return cli::cmd_encode(cfg, std::cerr);
    if (*features) return cli::cmd_features(cfg, std::cerr);
    if (*ftp) return cli::cmd_ftp(cfg, std::cerr);
    if (*train) return cli::cmd_train(cfg, std::cerr);
    if (*eval) return cli::cmd_eval(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "skepxel: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
