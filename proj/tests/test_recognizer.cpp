#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "skepxel/recognizer.hpp"

using namespace skepxel;

namespace {

ImageF random_image(std::mt19937_64& rng, std::size_t h, std::size_t w, std::size_t c) {
  std::uniform_real_distribution<float> u(-1, 1);
  ImageF img(h, w, c);
  for (auto& v : img.values()) v = u(rng);
  return img;
}

double dot_product(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("baseline extractor: pooling matches a direct average") {
  std::mt19937_64 rng(1);
  const auto img = random_image(rng, 36, 24, 3);
  const BaselineExtractor ex({12, 12, 16, 0});
  const auto pooled = ex.pool(img);
  REQUIRE(pooled.size() == 12 * 12 * 3);
  for (std::size_t r = 0; r < 12; ++r)
    for (std::size_t c = 0; c < 12; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) {
        double sum = 0;
        for (std::size_t y = 3 * r; y < 3 * r + 3; ++y)
          for (std::size_t x = 2 * c; x < 2 * c + 2; ++x) sum += img(y, x, ch);
        CHECK(pooled[(r * 12 + c) * 3 + ch] == doctest::Approx(sum / 6).epsilon(1e-12));
      }
}

TEST_CASE("baseline extractor: uneven grids") {
  std::mt19937_64 rng(2);
  const auto img = random_image(rng, 17, 31, 2);
  // pooling to the image's own size is the identity
  const auto same = BaselineExtractor({17, 31, 8, 0}).pool(img);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(same[i] == img.values()[i]);
  // a constant image pools to the constant on any grid
  const auto flat = BaselineExtractor({5, 7, 8, 0}).pool(ImageF(17, 31, 2, 0.75f));
  for (double v : flat) CHECK(v == doctest::Approx(0.75).epsilon(1e-12));
  // bins follow the row order
  ImageF ramp(17, 1, 1);
  for (std::size_t r = 0; r < 17; ++r) ramp(r, 0, 0) = float(r);
  const auto rows = BaselineExtractor({5, 1, 8, 0}).pool(ramp);
  REQUIRE(rows.size() == 5);
  CHECK(std::is_sorted(rows.begin(), rows.end()));
  CHECK(rows.front() < 2.0);
  CHECK(rows.back() > 14.0);
}

TEST_CASE("baseline extractor: zero image is degenerate") {
  const BaselineExtractor ex({});
  const auto f = ex.extract(ImageF(180, 180, 6));
  CHECK(f.degenerate);
  CHECK(f.values.size() == 256);
  for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("baseline extractor: deterministic and unit length") {
  std::mt19937_64 rng(3);
  const auto img = random_image(rng, 180, 180, 6);
  const BaselineExtractor a({12, 12, 256, 9});
  const BaselineExtractor b({12, 12, 256, 9});
  const auto fa = a.extract(img);
  CHECK(fa.values == b.extract(img).values);
  CHECK(fa.values == a.extract(img).values);
  CHECK(std::sqrt(dot_product(fa.values, fa.values)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(BaselineExtractor({12, 12, 256, 10}).extract(img).values != fa.values);
}

TEST_CASE("baseline extractor: projection roughly preserves inner products") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 1);
  const BaselineExtractor ex({12, 12, 256, 21});
  std::vector<double> errors;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> p(432), q(432);
    for (auto& v : p) v = g(rng);
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = 0.7 * p[k] + g(rng);
    const double exact = dot_product(p, q);
    const auto pp = ex.project(p);
    const auto pq = ex.project(q);
    const double approx = dot_product(pp, pq);
    const double scale = std::sqrt(dot_product(p, p) * dot_product(q, q));
    errors.push_back(std::abs(approx - exact) / scale);
  }
  std::nth_element(errors.begin(), errors.begin() + 500, errors.end());
  CHECK(errors[500] < 0.15);
}

TEST_CASE("cosine distance") {
  const std::vector<double> a{1, 0}, b{0, 2}, c{3, 0}, zero{0, 0};
  CHECK(cosine_distance(a, b) == doctest::Approx(1.0));
  CHECK(cosine_distance(a, c) == doctest::Approx(0.0));
  CHECK(cosine_distance(a, zero) == 1.0);
}

TEST_CASE("knn_predict") {
  auto model = knn_train({{{1, 0}, "a"}, {{0, 1}, "b"}, {{1, 1}, "c"}}, 1);
  CHECK(knn_predict(model, std::vector<double>{0, 1}) == "b");
  CHECK(knn_predict(model, std::vector<double>{0, 5}) == "b");

  // k = 3: two "x" neighbours at equal small distance, one far "y"
  model = knn_train({{{1, 0.1}, "x"}, {{1, -0.1}, "x"}, {{-1, 0}, "y"}}, 3);
  CHECK(knn_predict(model, std::vector<double>{1, 0}) == "x");

  // a 1-1 vote split resolves to the closer class
  model = knn_train({{{1, 0.5}, "far"}, {{1, 0.05}, "near"}}, 2);
  CHECK(knn_predict(model, std::vector<double>{1, 0}) == "near");
  // exact tie in votes and distance resolves lexicographically
  model = knn_train({{{1, 0.5}, "b"}, {{1, -0.5}, "a"}}, 2);
  CHECK(knn_predict(model, std::vector<double>{1, 0}) == "a");

  CHECK_THROWS(knn_predict(KnnModel{}, std::vector<double>{1, 0}));
}

TEST_CASE("knn is invariant to positive scaling") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  std::vector<LabeledDescriptor> train;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> v(6);
    for (auto& x : v) x = g(rng);
    train.push_back({v, "c" + std::to_string(i % 4)});
  }
  auto scaled_train = train;
  for (auto& s : scaled_train)
    for (auto& x : s.values) x *= 3.5;
  const auto m1 = knn_train(train, 3);
  const auto m2 = knn_train(scaled_train, 3);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> q(6);
    for (auto& x : q) x = g(rng);
    auto sq = q;
    for (auto& x : sq) x *= 0.25;
    CHECK(knn_predict(m1, q) == knn_predict(m2, sq));
  }
}

TEST_CASE("ridge: separated clusters agree with nearest centroid") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0, 0.3);
  const std::map<std::string, std::vector<double>> centres{{"left", {-3, 0}}, {"right", {3, 1}}};
  std::vector<LabeledDescriptor> data;
  for (int i = 0; i < 60; ++i) {
    const auto& [label, c] = *std::next(centres.begin(), i % 2);
    data.push_back({{c[0] + g(rng), c[1] + g(rng)}, label});
  }
  const auto model = ridge_train(data, 1e-3);
  CHECK(model.classes == std::vector<std::string>{"left", "right"});
  for (const auto& s : data) {
    CHECK(ridge_predict(model, s.values) == s.label);
    CHECK(ridge_predict(model, s.values) == oracle::nearest_centroid(centres, s.values));
  }
  CHECK(ridge_train(data, 1e-3).weights == model.weights);
}

TEST_CASE("ridge: dual and primal paths agree") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 1);
  auto make = [&](int n, int d) {
    std::vector<LabeledDescriptor> out;
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(static_cast<std::size_t>(d));
      for (auto& x : v) x = g(rng);
      out.push_back({v, i % 3 == 0 ? "a" : (i % 3 == 1 ? "b" : "c")});
    }
    return out;
  };
  // n < d + 1 takes the dual system, n > d + 1 the primal one. Both must
  // satisfy the primal normal equations (X^T X + lambda I) W = X^T Y.
  for (auto [n, d] : std::vector<std::pair<int, int>>{{10, 30}, {50, 4}}) {
    const auto data = make(n, d);
    const double lambda = 0.5;
    const auto model = ridge_train(data, lambda);
    Eigen::MatrixXd x(n, d + 1);
    Eigen::MatrixXd y = -Eigen::MatrixXd::Ones(n, 3);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) x(i, k) = data[i].values[k];
      x(i, d) = 1;
      y(i, data[i].label[0] - 'a') = 1;
    }
    const Eigen::MatrixXd lhs =
        (x.transpose() * x + lambda * Eigen::MatrixXd::Identity(d + 1, d + 1)) * model.weights;
    CHECK((lhs - x.transpose() * y).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("ridge: heavy regularization and loss monotonicity") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 1);
  std::vector<LabeledDescriptor> data;
  for (int i = 0; i < 30; ++i) data.push_back({{g(rng), g(rng), g(rng)}, i % 2 ? "zeta" : "alpha"});
  const auto huge = ridge_train(data, 1e15);
  CHECK(huge.weights.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ridge_predict(huge, data[0].values) == "alpha");

  double prev = INFINITY;
  for (double lambda : {100.0, 1.0, 0.01}) {
    const double loss = ridge_training_loss(ridge_train(data, lambda), data);
    CHECK(loss <= prev);
    prev = loss;
  }
  CHECK_THROWS(ridge_train(data, 0.0));
  CHECK_THROWS(ridge_train({}, 1.0));
}

TEST_CASE("evaluate") {
  std::vector<LabeledDescriptor> train{{{1, 0}, "a"}, {{0, 1}, "b"}, {{-1, 0}, "c"}};
  const ClassifierModel model = knn_train(train, 1);
  const auto self = evaluate(model, train);
  CHECK(self.accuracy == 1.0);
  CHECK(self.correct == 3);

  std::vector<LabeledDescriptor> wrong{{{1, 0}, "b"}, {{0, 1}, "c"}, {{-1, 0}, "a"}, {{1, 0.1}, "b"}};
  const auto bad = evaluate(model, wrong);
  CHECK(bad.accuracy == 0.0);
  for (std::size_t i = 0; i < bad.classes.size(); ++i) CHECK(bad.confusion[i][i] == 0);

  std::vector<LabeledDescriptor> unknown{{{1, 0}, "a"}, {{0, 1}, "zz"}};
  const auto u = evaluate(model, unknown);
  CHECK(u.classes.back() == "zz");
  CHECK(u.accuracy == 0.5);

  for (const auto* r : {&self, &bad, &u}) {
    std::size_t total = 0, trace = 0;
    for (std::size_t i = 0; i < r->classes.size(); ++i) {
      std::size_t row = 0;
      for (auto v : r->confusion[i]) row += v;
      total += row;
      trace += r->confusion[i][i];
    }
    CHECK(total == r->total);
    CHECK(double(trace) / total == r->accuracy);
  }
  CHECK_THROWS(evaluate(model, {}));
  CHECK(to_text(self).find("accuracy") != std::string::npos);
}

TEST_CASE("model json roundtrip") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0, 1);
  std::vector<LabeledDescriptor> data;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> v(5);
    for (auto& x : v) x = static_cast<float>(g(rng));
    data.push_back({v, "k" + std::to_string(i % 3)});
  }
  const ClassifierModel knn = knn_train(data, 3);
  const ClassifierModel ridge = ridge_train(data, 0.1);
  for (const auto& m : {knn, ridge}) {
    const auto back = classifier_from_json(to_json(m));
    CHECK(model_classes(back) == model_classes(m));
    for (const auto& s : data) CHECK(predict(back, s.values) == predict(m, s.values));
  }
}

TEST_CASE("base64 f32 roundtrip") {
  for (std::size_t n : {0u, 1u, 2u, 3u, 7u}) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(static_cast<float>(0.1 * i - 0.3));
    CHECK(decode_f32_base64(encode_f32_base64(v)) == v);
  }
  CHECK_THROWS(decode_f32_base64("@@@@"));
}

TEST_CASE("synth_actions") {
  SynthConfig cfg;
  cfg.per_class = 4;
  cfg.train_per_class = 2;
  const auto a = synth_actions(cfg);
  const auto b = synth_actions(cfg);
  CHECK(a.manifest == b.manifest);
  CHECK(a.sequences == b.sequences);
  CHECK(a.sequences.size() == 20);
  std::map<Split, int> splits;
  for (const auto& e : a.manifest.entries) splits[e.split]++;
  CHECK(splits[Split::kTrain] == 10);
  CHECK(splits[Split::kTest] == 10);
  for (const auto& s : a.sequences) {
    CHECK(s.size() == 90);
    CHECK(s.joint_count() == 25);
    CHECK_NOTHROW(s.validate());
  }
  cfg.seed = 1;
  CHECK(synth_actions(cfg).sequences != a.sequences);
  cfg.classes = 1;
  CHECK_THROWS(synth_actions(cfg));
}
