#include "skepxel/recognizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "skepxel/random.hpp"

namespace skepxel {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Baseline extractor

void BaselineExtractorConfig::validate() const {
  if (pool_h < 1 || pool_w < 1) throw ValidationError("pool size must be >= 1");
  if (out_dim < 1) throw ValidationError("extractor out_dim must be >= 1");
}

BaselineExtractor::BaselineExtractor(BaselineExtractorConfig cfg) : cfg_(cfg) {
  cfg_.validate();
}

std::vector<double> BaselineExtractor::pool(const ImageF& image) const {
  if (image.empty()) throw ValidationError("cannot pool an empty image");
  const std::size_t ph = static_cast<std::size_t>(cfg_.pool_h);
  const std::size_t pw = static_cast<std::size_t>(cfg_.pool_w);
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const std::size_t c = image.channels();

  auto bounds = [](std::size_t i, std::size_t bins, std::size_t extent) {
    std::size_t begin = i * extent / bins;
    std::size_t end = std::max(begin + 1, (i + 1) * extent / bins);
    begin = std::min(begin, extent - 1);
    end = std::min(end, extent);
    return std::pair{begin, end};
  };

  std::vector<double> out(ph * pw * c, 0.0);
  std::vector<double> acc(c);
  for (std::size_t bi = 0; bi < ph; ++bi) {
    const auto [r0, r1] = bounds(bi, ph, h);
    for (std::size_t bj = 0; bj < pw; ++bj) {
      const auto [c0, c1] = bounds(bj, pw, w);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t r = r0; r < r1; ++r) {
        const float* px = &image(r, c0, 0);
        for (std::size_t col = c0; col < c1; ++col) {
          for (std::size_t ch = 0; ch < c; ++ch) acc[ch] += *px++;
        }
      }
      const double area = static_cast<double>((r1 - r0) * (c1 - c0));
      for (std::size_t ch = 0; ch < c; ++ch) out[(bi * pw + bj) * c + ch] = acc[ch] / area;
    }
  }
  return out;
}

const std::vector<double>& BaselineExtractor::matrix_for(std::size_t input_dim) const {
  std::lock_guard lock(mutex_);
  auto& slot = matrices_[input_dim];
  if (!slot) {
    const auto rows = static_cast<std::size_t>(cfg_.out_dim);
    auto m = std::make_unique<std::vector<double>>(rows * input_dim);
    Rng rng(derive_seed(cfg_.seed, 0x70726f6au, input_dim));  // "proj"
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(rows)));
    for (double& v : *m) v = gauss(rng);
    slot = std::move(m);
  }
  return *slot;
}

std::vector<double> BaselineExtractor::project(std::span<const double> pooled) const {
  const auto& m = matrix_for(pooled.size());
  const auto rows = static_cast<std::size_t>(cfg_.out_dim);
  std::vector<double> out(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = &m[r * pooled.size()];
    double s = 0.0;
    for (std::size_t i = 0; i < pooled.size(); ++i) s += row[i] * pooled[i];
    out[r] = s;
  }
  return out;
}

ExtractedFeature BaselineExtractor::extract(const ImageF& image) const {
  ExtractedFeature out;
  out.values = project(pool(image));
  double sq = 0.0;
  for (double v : out.values) sq += v * v;
  if (!(sq > 0.0)) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
    out.degenerate = true;
    return out;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : out.values) v *= inv;
  return out;
}

// ---------------------------------------------------------------------------
// k-NN

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("descriptor dimensions differ");
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (!(aa > 0.0) || !(bb > 0.0)) return 1.0;
  return 1.0 - ab / (std::sqrt(aa) * std::sqrt(bb));
}

KnnModel knn_train(std::vector<LabeledDescriptor> samples, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (samples.empty()) throw ValidationError("k-NN model needs at least one sample");
  for (const auto& s : samples) {
    if (s.values.size() != samples[0].values.size()) {
      throw ValidationError("training descriptors differ in dimension");
    }
  }
  return KnnModel{k, std::move(samples)};
}

std::string knn_predict(const KnnModel& model, std::span<const double> query) {
  if (model.samples.empty()) throw ValidationError("k-NN model is empty");
  std::vector<std::pair<double, std::size_t>> dist(model.samples.size());
  for (std::size_t i = 0; i < model.samples.size(); ++i) {
    dist[i] = {cosine_distance(model.samples[i].values, query), i};
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(model.k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());

  struct Vote {
    std::size_t count = 0;
    double distance = 0.0;
  };
  std::map<std::string, Vote> votes;
  for (std::size_t i = 0; i < k; ++i) {
    auto& v = votes[model.samples[dist[i].second].label];
    ++v.count;
    v.distance += dist[i].first;
  }
  const std::string* best = nullptr;
  Vote best_vote;
  for (const auto& [label, vote] : votes) {  // labels ascend
    if (!best || vote.count > best_vote.count ||
        (vote.count == best_vote.count &&
         vote.distance / vote.count < best_vote.distance / best_vote.count)) {
      best = &label;
      best_vote = vote;
    }
  }
  return *best;
}

// ---------------------------------------------------------------------------
// Ridge

namespace {

Eigen::MatrixXd design_matrix(std::span<const LabeledDescriptor> samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto d = static_cast<Eigen::Index>(samples[0].values.size());
  Eigen::MatrixXd x(n, d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(samples[i].values.size()) != d) {
      throw ValidationError("training descriptors differ in dimension");
    }
    for (Eigen::Index k = 0; k < d; ++k) x(i, k) = samples[i].values[k];
    x(i, d) = 1.0;
  }
  return x;
}

Eigen::MatrixXd target_matrix(std::span<const LabeledDescriptor> samples,
                              const std::vector<std::string>& classes) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(samples.size()),
                                                static_cast<Eigen::Index>(classes.size()), -1.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), samples[i].label);
    y(static_cast<Eigen::Index>(i), it - classes.begin()) = 1.0;
  }
  return y;
}

}  // namespace

RidgeModel ridge_train(std::span<const LabeledDescriptor> samples, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("ridge lambda must be > 0");
  if (samples.empty()) throw ValidationError("ridge needs at least one training sample");
  std::set<std::string> labels;
  for (const auto& s : samples) labels.insert(s.label);

  RidgeModel model;
  model.lambda = lambda;
  model.classes.assign(labels.begin(), labels.end());
  const Eigen::MatrixXd x = design_matrix(samples);
  const Eigen::MatrixXd y = target_matrix(samples, model.classes);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < p) {
    Eigen::MatrixXd gram = x * x.transpose();
    gram.diagonal().array() += lambda;
    model.weights = x.transpose() * gram.llt().solve(y);
  } else {
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += lambda;
    model.weights = gram.llt().solve(x.transpose() * y);
  }
  return model;
}

std::vector<double> ridge_scores(const RidgeModel& model, std::span<const double> query) {
  const Eigen::Index d = model.weights.rows() - 1;
  if (static_cast<Eigen::Index>(query.size()) != d) {
    throw ValidationError("query dimension " + std::to_string(query.size()) +
                          " does not match ridge model (" + std::to_string(d) + ")");
  }
  std::vector<double> scores(model.classes.size(), 0.0);
  for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
    double s = model.weights(d, c);
    for (Eigen::Index k = 0; k < d; ++k) s += model.weights(k, c) * query[k];
    scores[static_cast<std::size_t>(c)] = s;
  }
  return scores;
}

std::string ridge_predict(const RidgeModel& model, std::span<const double> query) {
  if (model.classes.empty()) throw ValidationError("ridge model has no classes");
  const auto scores = ridge_scores(model, query);
  // Scores closer than rounding noise count as equal so the lexicographic
  // rule decides; classes are sorted, so the first maximum wins.
  double scale = 1.0;
  for (double s : scores) scale = std::max(scale, std::abs(s));
  const double tol = 1e-12 * scale;
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best] + tol) best = c;
  }
  return model.classes[best];
}

double ridge_training_loss(const RidgeModel& model, std::span<const LabeledDescriptor> samples) {
  const Eigen::MatrixXd residual =
      design_matrix(samples) * model.weights - target_matrix(samples, model.classes);
  return residual.squaredNorm();
}

std::string predict(const ClassifierModel& model, std::span<const double> query) {
  return std::visit(
      [&](const auto& m) -> std::string {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, KnnModel>) {
          return knn_predict(m, query);
        } else {
          return ridge_predict(m, query);
        }
      },
      model);
}

std::vector<std::string> model_classes(const ClassifierModel& model) {
  if (const auto* r = std::get_if<RidgeModel>(&model)) return r->classes;
  std::set<std::string> labels;
  for (const auto& s : std::get<KnnModel>(model).samples) labels.insert(s.label);
  return {labels.begin(), labels.end()};
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string encode_f32_base64(std::span<const double> values) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(values.size() * 4);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    const std::uint32_t chunk = (std::uint32_t{bytes[i]} << 16) |
                                (i + 1 < bytes.size() ? std::uint32_t{bytes[i + 1]} << 8 : 0) |
                                (i + 2 < bytes.size() ? std::uint32_t{bytes[i + 2]} : 0);
    out += kAlphabet[(chunk >> 18) & 63];
    out += kAlphabet[(chunk >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(chunk >> 6) & 63] : '=';
    out += i + 2 < bytes.size() ? kAlphabet[chunk & 63] : '=';
  }
  return out;
}

std::vector<double> decode_f32_base64(std::string_view text) {
  if (text.size() % 4 != 0) throw ParseError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t chunk = 0;
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      int v = 0;
      if (c == '=') {
        ++pad;
      } else {
        v = decode_char(c);
        if (v < 0 || pad > 0) throw ParseError("invalid base64 character");
      }
      chunk = (chunk << 6) | static_cast<std::uint32_t>(v);
    }
    bytes.push_back(static_cast<std::uint8_t>(chunk >> 16));
    if (pad < 2) bytes.push_back(static_cast<std::uint8_t>(chunk >> 8));
    if (pad < 1) bytes.push_back(static_cast<std::uint8_t>(chunk));
  }
  if (bytes.size() % 4 != 0) throw ParseError("base64 payload is not a whole number of f32");
  std::vector<double> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t{bytes[4 * i + b]} << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

std::string to_json(const ClassifierModel& model) {
  json doc;
  if (const auto* knn = std::get_if<KnnModel>(&model)) {
    doc["kind"] = "knn";
    doc["k"] = knn->k;
    doc["metric"] = "cosine";
    json samples = json::array();
    for (const auto& s : knn->samples) {
      samples.push_back({{"label", s.label}, {"values", encode_f32_base64(s.values)}});
    }
    doc["samples"] = std::move(samples);
  } else {
    const auto& ridge = std::get<RidgeModel>(model);
    doc["kind"] = "ridge";
    doc["lambda"] = ridge.lambda;
    doc["classes"] = ridge.classes;
    doc["rows"] = ridge.weights.rows();
    json weights = json::array();
    for (Eigen::Index c = 0; c < ridge.weights.cols(); ++c) {
      std::vector<double> column(ridge.weights.col(c).data(),
                                 ridge.weights.col(c).data() + ridge.weights.rows());
      weights.push_back(std::move(column));
    }
    doc["weights"] = std::move(weights);
  }
  return doc.dump();
}

ClassifierModel classifier_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "knn") {
      std::vector<LabeledDescriptor> samples;
      for (const auto& s : doc.at("samples")) {
        samples.push_back({decode_f32_base64(s.at("values").get<std::string>()),
                           s.at("label").get<std::string>()});
      }
      return knn_train(std::move(samples), doc.at("k").get<int>());
    }
    if (kind == "ridge") {
      RidgeModel model;
      model.lambda = doc.at("lambda").get<double>();
      model.classes = doc.at("classes").get<std::vector<std::string>>();
      const auto rows = doc.at("rows").get<Eigen::Index>();
      const auto& weights = doc.at("weights");
      if (weights.size() != model.classes.size()) {
        throw ParseError("ridge weight columns do not match class count");
      }
      model.weights.resize(rows, static_cast<Eigen::Index>(model.classes.size()));
      for (std::size_t c = 0; c < weights.size(); ++c) {
        const auto column = weights[c].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(column.size()) != rows) {
          throw ParseError("ridge weight column has the wrong length");
        }
        for (Eigen::Index r = 0; r < rows; ++r) {
          model.weights(r, static_cast<Eigen::Index>(c)) = column[static_cast<std::size_t>(r)];
        }
      }
      return model;
    }
    throw ParseError("unknown classifier kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Evaluation

EvalReport evaluate(const ClassifierModel& model, std::span<const LabeledDescriptor> test) {
  if (test.empty()) throw ValidationError("cannot evaluate on an empty test set");
  std::set<std::string> all;
  for (const auto& c : model_classes(model)) all.insert(c);
  for (const auto& t : test) all.insert(t.label);

  EvalReport report;
  report.classes.assign(all.begin(), all.end());
  const std::size_t k = report.classes.size();
  report.confusion.assign(k, std::vector<std::size_t>(k, 0));
  auto index_of = [&](const std::string& label) {
    return static_cast<std::size_t>(
        std::lower_bound(report.classes.begin(), report.classes.end(), label) -
        report.classes.begin());
  };
  for (const auto& t : test) {
    const std::string predicted = predict(model, t.values);
    ++report.confusion[index_of(t.label)][index_of(predicted)];
    if (predicted == t.label) ++report.correct;
  }
  report.total = test.size();
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
  report.recall.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t row = 0;
    for (std::size_t p = 0; p < k; ++p) row += report.confusion[c][p];
    report.recall[c] = row ? static_cast<double>(report.confusion[c][c]) / row : 0.0;
  }
  return report;
}

std::string to_json(const EvalReport& report) {
  json doc;
  doc["accuracy"] = report.accuracy;
  doc["correct"] = report.correct;
  doc["total"] = report.total;
  doc["classes"] = report.classes;
  doc["confusion"] = report.confusion;
  doc["recall"] = report.recall;
  return doc.dump(2);
}

std::string to_text(const EvalReport& report) {
  std::size_t width = 9;
  for (const auto& c : report.classes) width = std::max(width, c.size() + 2);
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "true\\pred";
  for (const auto& c : report.classes) out << std::right << std::setw(static_cast<int>(width)) << c;
  out << std::right << std::setw(10) << "recall" << "\n";
  for (std::size_t r = 0; r < report.classes.size(); ++r) {
    out << std::left << std::setw(static_cast<int>(width)) << report.classes[r];
    for (std::size_t p = 0; p < report.classes.size(); ++p) {
      out << std::right << std::setw(static_cast<int>(width)) << report.confusion[r][p];
    }
    out << std::right << std::setw(10) << std::fixed << std::setprecision(3)
        << report.recall[r] << "\n";
  }
  out << "accuracy " << std::fixed << std::setprecision(4) << report.accuracy << " ("
      << report.correct << "/" << report.total << ")\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Synthetic actions

void SynthConfig::validate() const {
  if (classes < 2) throw ValidationError("synth needs at least 2 classes");
  if (per_class < 2) throw ValidationError("synth needs at least 2 samples per class");
  if (train_per_class < 1 || train_per_class >= per_class) {
    throw ValidationError("train_per_class must lie in [1, per_class)");
  }
  if (frames < 2) throw ValidationError("synth needs at least 2 frames");
  if (joints < 4) throw ValidationError("synth needs at least 4 joints");
  if (!(fps > 0.0)) throw ValidationError("synth fps must be positive");
  if (!(noise >= 0.0)) throw ValidationError("synth noise must be >= 0");
}

namespace {

// Approximate NTU 25-joint rest pose in meters, y up, facing -z.
const std::vector<Vec3>& ntu_rest_pose() {
  static const std::vector<Vec3> pose = {
      {0.00, 0.00, 0.00},   {0.00, 0.30, 0.00},   {0.00, 0.55, 0.00},   {0.00, 0.70, 0.00},
      {-0.18, 0.50, 0.00},  {-0.30, 0.28, 0.00},  {-0.35, 0.05, 0.00},  {-0.36, -0.02, 0.00},
      {0.18, 0.50, 0.00},   {0.30, 0.28, 0.00},   {0.35, 0.05, 0.00},   {0.36, -0.02, 0.00},
      {-0.10, -0.05, 0.00}, {-0.10, -0.45, 0.00}, {-0.10, -0.85, 0.00}, {-0.10, -0.90, -0.10},
      {0.10, -0.05, 0.00},  {0.10, -0.45, 0.00},  {0.10, -0.85, 0.00},  {0.10, -0.90, -0.10},
      {0.00, 0.50, 0.00},   {-0.37, -0.08, 0.00}, {-0.33, -0.03, -0.03}, {0.37, -0.08, 0.00},
      {0.33, -0.03, -0.03}};
  return pose;
}

std::vector<Vec3> rest_pose(const SkeletonLayout& layout, std::uint64_t seed) {
  if (layout.joint_count == 25) return ntu_rest_pose();
  Rng rng(derive_seed(seed, 0x72657374u));  // "rest"
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  std::vector<Vec3> pose(static_cast<std::size_t>(layout.joint_count));
  for (auto& p : pose) p = {u(rng), u(rng) + 0.2, 0.3 * u(rng)};
  pose[static_cast<std::size_t>(layout.hip)] = {0.0, 0.0, 0.0};
  pose[static_cast<std::size_t>(layout.left_shoulder)] = {-0.18, 0.5, 0.0};
  pose[static_cast<std::size_t>(layout.right_shoulder)] = {0.18, 0.5, 0.0};
  return pose;
}

struct JointMotion {
  std::size_t joint;
  Vec3 amplitude;
  double cycles;  // over the clip
  double phase;
};

std::vector<JointMotion> class_motion(int joints, std::uint64_t seed, std::uint64_t cls) {
  Rng rng(derive_seed(seed, 0x636c6173u, cls));  // "clas"
  std::uniform_int_distribution<int> count(3, 6);
  std::uniform_real_distribution<double> amp(0.05, 0.3);
  std::uniform_real_distribution<double> cycles(0.5, 3.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::bernoulli_distribution flip(0.5);

  std::vector<int> pool(static_cast<std::size_t>(joints - 1));
  for (int j = 1; j < joints; ++j) pool[static_cast<std::size_t>(j - 1)] = j;
  std::shuffle(pool.begin(), pool.end(), rng);
  const int moving = std::min(count(rng), joints - 1);

  std::vector<JointMotion> motion;
  for (int i = 0; i < moving; ++i) {
    JointMotion jm;
    jm.joint = static_cast<std::size_t>(pool[static_cast<std::size_t>(i)]);
    auto signed_amp = [&] { return flip(rng) ? amp(rng) : -amp(rng); };
    jm.amplitude = {signed_amp(), signed_amp(), signed_amp()};
    jm.cycles = cycles(rng);
    jm.phase = phase(rng);
    motion.push_back(jm);
  }
  return motion;
}

}  // namespace

SynthDataset synth_actions(const SynthConfig& cfg) {
  cfg.validate();
  SynthDataset data;
  data.manifest.layout = SkeletonLayout::generic(cfg.joints);
  const auto rest = rest_pose(data.manifest.layout, cfg.seed);

  for (int c = 0; c < cfg.classes; ++c) {
    const std::string label = "class" + std::to_string(c);
    const auto motion = class_motion(cfg.joints, cfg.seed,
                                     cfg.identical_classes ? 0u : static_cast<std::uint64_t>(c));
    for (int s = 0; s < cfg.per_class; ++s) {
      Rng rng(derive_seed(cfg.seed, 0x73616d70u,  // "samp"
                          static_cast<std::uint64_t>(c) * 1000003u + static_cast<std::uint64_t>(s)));
      std::uniform_real_distribution<double> amp_jitter(0.85, 1.15);
      std::uniform_real_distribution<double> speed_jitter(0.9, 1.1);
      std::uniform_real_distribution<double> phase_jitter(-0.3, 0.3);
      std::uniform_real_distribution<double> shift(-1.0, 1.0);
      std::uniform_real_distribution<double> yaw_dist(-std::numbers::pi / 4, std::numbers::pi / 4);
      std::normal_distribution<double> noise(0.0, cfg.noise);

      const double amp_scale = amp_jitter(rng);
      const double speed = speed_jitter(rng);
      const double phase = phase_jitter(rng);
      const Vec3 translation{shift(rng), 0.5 * shift(rng), 2.5 + shift(rng)};
      const double yaw = yaw_dist(rng);
      const double cy = std::cos(yaw);
      const double sy = std::sin(yaw);

      SkeletonSequence seq;
      seq.layout = data.manifest.layout;
      seq.fps = cfg.fps;
      seq.label = label;
      char id[64];
      std::snprintf(id, sizeof(id), "synth_c%02d_s%03d", c, s);
      seq.source_id = id;
      seq.frames.resize(static_cast<std::size_t>(cfg.frames));
      for (int f = 0; f < cfg.frames; ++f) {
        std::vector<Vec3> joints = rest;
        const double t = static_cast<double>(f) / static_cast<double>(cfg.frames);
        for (const auto& jm : motion) {
          const double a =
              amp_scale * std::sin(2.0 * std::numbers::pi * jm.cycles * speed * t + jm.phase + phase);
          joints[jm.joint] += a * jm.amplitude;
        }
        for (auto& p : joints) {
          if (cfg.noise > 0.0) p += Vec3{noise(rng), noise(rng), noise(rng)};
          p = Vec3{cy * p.x + sy * p.z, p.y, -sy * p.x + cy * p.z} + translation;
        }
        seq.frames[static_cast<std::size_t>(f)].joints = std::move(joints);
      }
      data.manifest.entries.push_back(
          {seq.source_id + ".json", label, s < cfg.train_per_class ? Split::kTrain : Split::kTest});
      data.sequences.push_back(std::move(seq));
    }
  }
  return data;
}

}  // namespace skepxel
