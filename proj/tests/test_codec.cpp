#include <doctest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "skepxel/codec.hpp"

using namespace skepxel;

namespace {

ArrangementSet random_set(int h, int w, int m, std::mt19937_64& rng) {
  ArrangementSet set;
  for (int i = 0; i < m; ++i) set.members.push_back(random_arrangement(h, w, rng));
  set.gamma = set_metric(set.members);
  set.gamma_t = set.gamma - 1;
  return set;
}

// Pixel (b*h + r, f*w + c, ch) must hold coordinate ch of the joint that
// member b places at (r, c), taken from sampled frame f.
void check_layout(const ImageF& img, const std::vector<SkeletonFrame>& frames,
                  const ArrangementSet& set, std::size_t channel_offset = 0) {
  const int h = set.h(), w = set.w();
  REQUIRE(img.height() == static_cast<std::size_t>(set.m() * h));
  REQUIRE(img.width() == frames.size() * w);
  for (std::size_t f = 0; f < frames.size(); ++f)
    for (int b = 0; b < set.m(); ++b)
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          for (std::size_t ch = 0; ch < 3; ++ch) {
            const Vec3& p = frames[f].joints[set.members[b].at(r, c)];
            REQUIRE(img(b * h + r, f * w + c, channel_offset + ch) == static_cast<float>(p[ch]));
          }
}

}  // namespace

TEST_CASE("build_skepxel: identity and permuted") {
  SkeletonFrame frame;
  for (int j = 0; j < 4; ++j) frame.joints.push_back({double(j), 0, 0});
  const auto id = build_skepxel(frame, Arrangement::identity(2, 2));
  CHECK(id.data(0, 0, 0) == 0);
  CHECK(id.data(0, 1, 0) == 1);
  CHECK(id.data(1, 0, 0) == 2);
  CHECK(id.data(1, 1, 0) == 3);
  const auto perm = build_skepxel(frame, Arrangement(2, 2, {2, 0, 3, 1}));
  CHECK(perm.data(0, 0, 0) == 2);
  CHECK(perm.data(0, 1, 0) == 0);
  CHECK(perm.data(1, 0, 0) == 3);
  CHECK(perm.data(1, 1, 0) == 1);
  SkeletonFrame small;
  small.joints.resize(3);
  CHECK_THROWS(build_skepxel(small, Arrangement::identity(2, 2)));
}

TEST_CASE("build_frame_tensor stacks members") {
  std::mt19937_64 rng(1);
  const auto seq = oracle::random_sequence(rng, 25, 1);
  auto set = random_set(5, 5, 1, rng);
  CHECK(build_frame_tensor(seq.frames[0], set).data == build_skepxel(seq.frames[0], set.members[0]).data);
  set = random_set(5, 5, 36, rng);
  const auto ft = build_frame_tensor(seq.frames[0], set);
  CHECK(ft.data.height() == 180);
  CHECK(ft.data.width() == 5);
  const auto second = build_skepxel(seq.frames[0], set.members[1]);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c)
      for (int ch = 0; ch < 3; ++ch) CHECK(ft.data(5 + r, c, ch) == second.data(r, c, ch));
}

TEST_CASE("plan_windows") {
  auto starts = [](const WindowPlan& p) {
    std::vector<double> s;
    for (const auto& w : p.windows) s.push_back(w.start);
    return s;
  };
  CHECK(starts(plan_windows(36, 36, 18)) == std::vector<double>{0});
  CHECK(starts(plan_windows(90, 36, 18)) == std::vector<double>{0, 18, 36, 54});
  CHECK(starts(plan_windows(100, 36, 18)) == std::vector<double>{0, 18, 36, 54, 64});
  CHECK(starts(plan_windows(37, 36, 100)) == std::vector<double>{0, 1});

  const auto short_plan = plan_windows(10, 36, 18);
  REQUIRE(short_plan.size() == 1);
  const auto& span = short_plan.windows[0];
  CHECK(span.n == 36);
  CHECK(span.position(0) == 0);
  CHECK(span.position(1) == doctest::Approx(9.0 / 35).epsilon(1e-15));
  CHECK(span.position(2) == doctest::Approx(18.0 / 35).epsilon(1e-15));
  CHECK(span.position(35) == doctest::Approx(9.0).epsilon(1e-15));

  CHECK_THROWS(plan_windows(0, 36, 18));
  CHECK_THROWS(plan_windows(10, 1, 1));
  CHECK_THROWS(plan_windows(10, 4, 0));

  SUBCASE("every window has n points inside the sequence") {
    for (std::size_t len = 1; len < 120; len += 7) {
      for (int n : {2, 5, 36}) {
        for (int stride : {1, 3, 18, 50}) {
          const auto plan = plan_windows(len, n, stride);
          REQUIRE(plan.size() >= 1);
          double prev = -1;
          for (const auto& w : plan.windows) {
            CHECK(w.n == n);
            CHECK(w.start > prev);
            prev = w.start;
            CHECK(w.position(0) >= 0);
            CHECK(w.position(n - 1) <= double(len - 1) + 1e-9);
          }
          if (len >= static_cast<std::size_t>(n)) {
            CHECK(plan.windows.back().position(n - 1) == double(len - 1));
          }
        }
      }
    }
  }
}

TEST_CASE("sample_frames") {
  std::mt19937_64 rng(3);
  const auto seq = oracle::random_sequence(rng, 9, 6);
  const auto exact = sample_frames(seq, {2, 1, 3});
  REQUIRE(exact.size() == 3);
  CHECK(exact[0] == seq.frames[2]);
  CHECK(exact[2] == seq.frames[4]);

  const auto mid = sample_frames(seq, {0.5, 1, 2});
  for (int j = 0; j < 9; ++j) {
    const Vec3 want = 0.5 * (seq.frames[0].joints[j] + seq.frames[1].joints[j]);
    CHECK(norm(mid[0].joints[j] - want) < 1e-15);
  }

  const auto still = oracle::constant_sequence(9, 4);
  for (const auto& f : sample_frames(still, plan_windows(4, 11, 1).windows[0])) {
    CHECK(f == still.frames[0]);
  }
  CHECK_THROWS(sample_frames(seq, {3, 1, 4}));
}

TEST_CASE("location image layout: exhaustive pixel check") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int joints = trial % 2 ? 25 : 20;
    const auto [h, w] = grid_shape_for(joints);
    const auto set = random_set(h, w, 1 + trial % 6, rng);
    const auto seq = oracle::random_sequence(rng, joints, 3 + trial);
    const int n = 2 + trial % 9;
    const auto plan = plan_windows(seq.size(), n, 1 + trial % 4);
    for (const auto& span : plan.windows) {
      const auto img = build_location_image(seq, set, span);
      CHECK(img.kind == ImageKind::kLocation);
      check_layout(img.data, sample_frames(seq, span), set);
    }
  }
}

TEST_CASE("180x180 image: 25 joints, m = n = 36") {
  std::mt19937_64 rng(2);
  const auto set = random_set(5, 5, 36, rng);
  const auto seq = oracle::random_sequence(rng, 25, 36);
  const auto img = build_location_image(seq, set, plan_windows(36, 36, 18).windows[0]);
  CHECK(img.data.height() == 180);
  CHECK(img.data.width() == 180);
  CHECK(img.data.channels() == 3);
}

TEST_CASE("location image of a static sequence repeats one block") {
  std::mt19937_64 rng(6);
  const auto set = random_set(4, 4, 3, rng);
  const auto img = build_location_image(oracle::constant_sequence(16, 8), set, {0, 1, 8}).data;
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 4; c < img.width(); ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) CHECK(img(r, c, ch) == img(r, c % 4, ch));
  const auto one = build_location_image(oracle::constant_sequence(16, 8), set, {3, 1, 1});
  CHECK(one.data == build_frame_tensor(oracle::constant_sequence(16, 1).frames[0], set).data);
}

TEST_CASE("velocity image") {
  std::mt19937_64 rng(8);
  const auto set = random_set(5, 5, 4, rng);

  const auto still = build_velocity_image(oracle::constant_sequence(25, 10), set, {0, 1, 10});
  CHECK(still.kind == ImageKind::kVelocity);
  for (float v : still.data.values()) CHECK(v == 0.0f);

  const Vec3 d{0.125, -0.25, 0.5};
  const auto moving = build_velocity_image(oracle::linear_sequence(25, 12, d), set, {1, 1, 10});
  for (std::size_t i = 0; i < moving.data.size(); ++i) {
    CHECK(moving.data.values()[i] == static_cast<float>(d[i % 3]));
  }

  SUBCASE("n = 2 repeats the single difference") {
    const auto seq = oracle::random_sequence(rng, 25, 2);
    const auto img = build_velocity_image(seq, set, {0, 1, 2}).data;
    for (std::size_t r = 0; r < img.height(); ++r)
      for (std::size_t c = 0; c < 5; ++c)
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const int joint = set.members[r / 5].at(int(r % 5), int(c));
          const double want = seq.frames[1].joints[joint][ch] - seq.frames[0].joints[joint][ch];
          CHECK(img(r, c, ch) == static_cast<float>(want));
          CHECK(img(r, c + 5, ch) == img(r, c, ch));
        }
  }

  SUBCASE("random sequences match forward differences") {
    const auto seq = oracle::random_sequence(rng, 25, 15);
    const WindowSpan span{2, 1, 9};
    const auto frames = sample_frames(seq, span);
    std::vector<SkeletonFrame> diffs;
    for (std::size_t f = 0; f + 1 < frames.size(); ++f) {
      SkeletonFrame v;
      for (int j = 0; j < 25; ++j) v.joints.push_back(frames[f + 1].joints[j] - frames[f].joints[j]);
      diffs.push_back(v);
    }
    diffs.push_back(diffs.back());
    check_layout(build_velocity_image(seq, set, span).data, diffs, set);
  }

  CHECK_THROWS(build_velocity_image(oracle::constant_sequence(25, 3), set, {0, 1, 1}));
}

TEST_CASE("compose_locvel") {
  std::mt19937_64 rng(12);
  const auto set = random_set(5, 5, 6, rng);
  const auto seq = oracle::random_sequence(rng, 25, 20);
  const WindowSpan span{4, 1, 12};
  const auto loc = build_location_image(seq, set, span);
  const auto vel = build_velocity_image(seq, set, span);
  const auto both = compose_locvel(loc, vel);
  CHECK(both.data.channels() == 6);
  CHECK(both.kind == ImageKind::kLocationVelocity);
  for (std::size_t r = 0; r < loc.data.height(); ++r)
    for (std::size_t c = 0; c < loc.data.width(); ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) {
        CHECK(both.data(r, c, ch) == loc.data(r, c, ch));
        CHECK(both.data(r, c, ch + 3) == vel.data(r, c, ch));
      }
  CHECK(build_image(seq, set, span, ImageKind::kLocationVelocity).data == both.data);

  const auto still = compose_locvel(
      build_location_image(oracle::constant_sequence(25, 5), set, {0, 1, 5}),
      build_velocity_image(oracle::constant_sequence(25, 5), set, {0, 1, 5}));
  for (std::size_t i = 3; i < still.data.size(); i += 6)
    for (std::size_t k = 0; k < 3; ++k) CHECK(still.data.values()[i + k] == 0.0f);

  const auto other = build_velocity_image(seq, set, {5, 1, 12});
  CHECK_THROWS(compose_locvel(loc, other));
}

TEST_CASE("pad_joints") {
  SkeletonSequence seq;
  seq.layout = SkeletonLayout::generic(14);
  SkeletonFrame f;
  for (int j = 0; j < 14; ++j) f.joints.push_back({double(j), 0, 0});
  f.joints[0] = {0, 0, 0};
  f.joints[1] = {2, 0, 0};
  seq.frames = {f, f};

  const std::vector<std::pair<int, int>> recipe{{0, 1}, {5, 5}};
  const auto out = pad_joints(seq, 16, recipe);
  CHECK(out.joint_count() == 16);
  CHECK(out.frames[1].joints[14] == Vec3{1, 0, 0});
  CHECK(out.frames[1].joints[15] == f.joints[5]);
  CHECK(grid_shape_for(out.joint_count()) == std::pair{4, 4});
  CHECK_THROWS(pad_joints(seq, 17, recipe));
}

TEST_CASE("raw container roundtrip is bitwise") {
  std::mt19937_64 rng(31);
  std::normal_distribution<float> g(0, 10);
  ImageF img(30, 45, 6);
  for (auto& v : img.values()) v = g(rng);
  const auto bytes = encode_raw(img);
  CHECK(bytes.size() == 16 + img.size() * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SKPX");
  CHECK(decode_raw(bytes) == img);
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS(decode_raw(truncated));
}

TEST_CASE("export and import") {
  const auto dir = oracle::scratch_dir("codec_export");
  std::mt19937_64 rng(44);
  const auto set = random_set(5, 5, 36, rng);
  const auto seq = oracle::random_sequence(rng, 25, 40);
  const auto span = plan_windows(40, 36, 18).windows[1];
  const auto img = build_image(seq, set, span, ImageKind::kLocationVelocity);

  ImageMetadata meta;
  meta.source = "clip";
  meta.label = "wave";
  meta.window = span;
  meta.stride = 18;
  meta.arrangement_set = set.id();
  meta.kind = img.kind;
  meta.fps = 30;

  SUBCASE("raw-f32 is lossless") {
    const auto files = export_image(img, meta, ExportMode::kRawF32, dir, "clip_w00004");
    CHECK(files.data_files.size() == 1);
    const auto back = import_image(files.sidecar);
    CHECK(back.data == img.data);
    CHECK(back.window == span);
    CHECK(back.kind == img.kind);
    const auto meta_back = image_metadata_from_json(read_text_file(files.sidecar));
    CHECK(meta_back.label == meta.label);
    CHECK(meta_back.arrangement_set == set.id());
  }

  SUBCASE("png8 writes two PNGs and stays within the quantization bound") {
    const auto files = export_image(img, meta, ExportMode::kPng8, dir, "clip_png");
    CHECK(files.data_files.size() == 2);
    std::size_t pngs = 0, sidecars = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      pngs += e.path().extension() == ".png";
      sidecars += e.path().extension() == ".json";
    }
    CHECK(pngs == 2);
    CHECK(sidecars == 1);
    const auto scaled = scale_channels(img.data);
    const auto back = import_image(files.sidecar);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      const auto& s = scaled.scales[i % 6];
      CHECK(std::abs(double(back.data.values()[i]) - double(img.data.values()[i])) <=
            (s.max - s.min) / 510.0 * (1 + 1e-5) + 1e-6);
    }
  }
}

TEST_CASE("png codec roundtrip") {
  std::mt19937_64 rng(50);
  ImageU8 px(13, 7, 3);
  for (auto& v : px.values()) v = static_cast<std::uint8_t>(rng());
  CHECK(decode_png(encode_png(px)) == px);
  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5};
  CHECK_THROWS(decode_png(junk));
}

TEST_CASE("encoding is deterministic") {
  std::mt19937_64 rng(70);
  const auto set = random_set(5, 5, 36, rng);
  const auto seq = oracle::random_sequence(rng, 25, 50);
  const auto span = plan_windows(50, 36, 18).windows.back();
  CHECK(encode_raw(build_image(seq, set, span, ImageKind::kLocationVelocity).data) ==
        encode_raw(build_image(seq, set, span, ImageKind::kLocationVelocity).data));
}
