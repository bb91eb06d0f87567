#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "skepxel/skeleton.hpp"
#include "skepxel/tensor.hpp"

namespace skepxel {

// Deterministic stand-in for a CNN feature extractor: average pooling to a
// pool_h x pool_w grid, a seeded Gaussian random projection to out_dim
// values, then L2 normalization.
struct BaselineExtractorConfig {
  int pool_h = 12;
  int pool_w = 12;
  int out_dim = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ExtractedFeature {
  std::vector<double> values;
  // True when the projection was the zero vector and could not be normalized.
  bool degenerate = false;
};

class BaselineExtractor {
 public:
  explicit BaselineExtractor(BaselineExtractorConfig cfg);

  const BaselineExtractorConfig& config() const noexcept { return cfg_; }

  // Area-average pooling; output order (row, col, channel).
  std::vector<double> pool(const ImageF& image) const;
  // Multiplies by the out_dim x pooled.size() projection matrix, entries
  // N(0, 1/out_dim). The matrix depends only on (seed, input size).
  std::vector<double> project(std::span<const double> pooled) const;
  ExtractedFeature extract(const ImageF& image) const;

 private:
  const std::vector<double>& matrix_for(std::size_t input_dim) const;

  BaselineExtractorConfig cfg_;
  mutable std::mutex mutex_;
  mutable std::map<std::size_t, std::unique_ptr<std::vector<double>>> matrices_;
};

struct LabeledDescriptor {
  std::vector<double> values;
  std::string label;
};

// 1 - cosine similarity; 1 when either vector is zero.
double cosine_distance(std::span<const double> a, std::span<const double> b);

struct KnnModel {
  int k = 1;
  std::vector<LabeledDescriptor> samples;
};

struct RidgeModel {
  double lambda = 1.0;
  std::vector<std::string> classes;  // sorted
  // (dim + 1) x classes; last row is the bias weight.
  Eigen::MatrixXd weights;
};

using ClassifierModel = std::variant<KnnModel, RidgeModel>;

KnnModel knn_train(std::vector<LabeledDescriptor> samples, int k = 1);

// Majority vote among the k nearest samples by cosine distance. Ties go to
// the smallest mean distance, then to the lexicographically smallest label.
std::string knn_predict(const KnnModel& model, std::span<const double> query);

// One-vs-rest regularized least squares on +-1 targets with a bias feature.
// Solves whichever normal-equation system (primal or dual) is smaller.
RidgeModel ridge_train(std::span<const LabeledDescriptor> samples, double lambda);
std::vector<double> ridge_scores(const RidgeModel& model, std::span<const double> query);
// argmax of ridge_scores. Scores within 1e-12 (relative) count as equal and
// resolve to the smallest label.
std::string ridge_predict(const RidgeModel& model, std::span<const double> query);
// Sum of squared residuals against the +-1 targets.
double ridge_training_loss(const RidgeModel& model, std::span<const LabeledDescriptor> samples);

std::string predict(const ClassifierModel& model, std::span<const double> query);
std::vector<std::string> model_classes(const ClassifierModel& model);

std::string to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(std::string_view text);

struct EvalReport {
  // Union of the model's classes and the labels seen in the test set, sorted.
  std::vector<std::string> classes;
  // confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<double> recall;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Test labels outside the model's class set can never be predicted and
// count as errors.
EvalReport evaluate(const ClassifierModel& model, std::span<const LabeledDescriptor> test);

std::string to_json(const EvalReport& report);
std::string to_text(const EvalReport& report);

struct SynthConfig {
  int classes = 5;
  int per_class = 12;
  int train_per_class = 8;
  int frames = 90;
  int joints = 25;
  std::uint64_t seed = 0;
  double fps = 30.0;
  // Per-coordinate jitter added to every frame.
  double noise = 0.01;
  // Every class shares the motion parameters of class 0 (negative control).
  bool identical_classes = false;

  void validate() const;
};

struct SynthDataset {
  DatasetManifest manifest;
  // Parallel to manifest.entries; source_id equals the entry path stem.
  std::vector<SkeletonSequence> sequences;
};

// Per class: a seeded motion family of sinusoidal joint trajectories over a
// rest pose. Per sample: amplitude, speed and phase jitter, coordinate
// noise, a random translation and a random rotation about the vertical axis.
SynthDataset synth_actions(const SynthConfig& cfg);

// base64 of little-endian f32 values.
std::string encode_f32_base64(std::span<const double> values);
std::vector<double> decode_f32_base64(std::string_view text);

}  // namespace skepxel
