#include <doctest.h>

#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "skepxel/skeleton.hpp"

using namespace skepxel;

namespace {

// Hand-rolled NTU text. Joint j of body b in frame f sits at (f + 10b, j, -j).
std::string ntu_text(int declared_frames, int written_frames, int bodies) {
  std::ostringstream s;
  s << declared_frames << "\n";
  for (int f = 0; f < written_frames; ++f) {
    s << bodies << "\n";
    for (int b = 0; b < bodies; ++b) {
      s << (72057594037931100ULL + b) << " 0 1 1 1 1 0 0.1 0.2 2\n";
      s << "25\n";
      for (int j = 0; j < 25; ++j) {
        s << (f + 10 * b) << " " << j << " " << -j
          << " 250.1 180.2 900.3 500.4 0.1 0.2 0.3 0.4 2\n";
      }
    }
  }
  return s.str();
}

}  // namespace

TEST_CASE("layout invariants") {
  CHECK_NOTHROW(SkeletonLayout::ntu25().validate());
  SkeletonLayout bad = SkeletonLayout::ntu25();
  bad.left_shoulder = bad.hip;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = SkeletonLayout::ntu25();
  bad.right_shoulder = 25;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(SkeletonLayout::generic(3).validate(), ValidationError);
  CHECK(SkeletonLayout::generic(25) == SkeletonLayout::ntu25());
}

TEST_CASE("ntu: one body, two frames") {
  const auto tracks = parse_ntu_skeleton(ntu_text(2, 2, 1));
  REQUIRE(tracks.size() == 1);
  REQUIRE(tracks[0].size() == 2);
  CHECK(tracks[0].joint_count() == 25);
  for (int f = 0; f < 2; ++f) {
    for (int j = 0; j < 25; ++j) {
      CHECK(tracks[0].frames[f].joints[j] == Vec3{double(f), double(j), double(-j)});
    }
  }
}

TEST_CASE("ntu: two bodies give two tracks") {
  const auto tracks = parse_ntu_skeleton(ntu_text(2, 2, 2), SkeletonLayout::ntu25(), "rec");
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].size() == 2);
  CHECK(tracks[1].size() == 2);
  CHECK(tracks[1].frames[1].joints[3] == Vec3{11, 3, -3});
  CHECK(tracks[0].source_id.rfind("rec#", 0) == 0);
}

TEST_CASE("ntu: frame shortfall names the counts") {
  try {
    parse_ntu_skeleton(ntu_text(3, 2, 1));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find("3") != std::string::npos);
    CHECK(what.find("2") != std::string::npos);
  }
}

TEST_CASE("ntu: malformed input carries a line number") {
  SUBCASE("bad frame count") {
    try {
      parse_ntu_skeleton("abc\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("joint line with two fields") {
    std::string text = ntu_text(1, 1, 1);
    const auto pos = text.find("0 0 0 250.1");
    REQUIRE(pos != std::string::npos);
    const auto eol = text.find('\n', pos);
    text.replace(pos, eol - pos, "0 0");
    try {
      parse_ntu_skeleton(text);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 5);
    }
  }
  SUBCASE("NaN coordinate rejected") {
    std::string text = ntu_text(1, 1, 1);
    text.replace(text.find("0 0 0 250.1"), 5, "nan 0 0");
    CHECK_THROWS_AS(parse_ntu_skeleton(text), ParseError);
  }
  SUBCASE("zero frames") {
    CHECK_THROWS_AS(parse_ntu_skeleton("0\n"), EmptyInputError);
  }
}

TEST_CASE("ntu: write then parse is identity") {
  std::mt19937_64 rng(7);
  auto a = oracle::random_sequence(rng, 25, 5);
  auto b = oracle::random_sequence(rng, 25, 3);
  a.layout = b.layout = SkeletonLayout::ntu25();
  a.source_id = "x#1";
  b.source_id = "x#2";
  const std::vector<SkeletonSequence> tracks{a, b};
  const auto back = parse_ntu_skeleton(write_ntu_skeleton(tracks), SkeletonLayout::ntu25(), "x");
  REQUIRE(back.size() == 2);
  CHECK(back[0].frames == a.frames);
  CHECK(back[1].frames == b.frames);
}

TEST_CASE("generic json: four-joint document") {
  const auto seq = parse_generic_json(
      R"({"joints":4, "fps":30, "frames":[[[0,0,0],[1,0,0],[0,1,0],[0,0,1]]]})");
  CHECK(seq.size() == 1);
  CHECK(seq.joint_count() == 4);
  CHECK(seq.fps == 30.0);
  CHECK(seq.frames[0].joints[1] == Vec3{1, 0, 0});
}

TEST_CASE("generic json: joint count mismatch") {
  CHECK_THROWS_AS(
      parse_generic_json(R"({"joints":4, "fps":30, "frames":[[[0,0,0],[1,0,0],[0,1,0]]]})"),
      ValidationError);
  CHECK_THROWS_AS(parse_generic_json(R"({"joints":4, "frames":[]})"), ParseError);
  CHECK_THROWS_AS(parse_generic_json("[1,2"), ParseError);
  CHECK_THROWS_AS(
      parse_generic_json(R"({"joints":4, "fps":30, "frames":[[[0,0,0],[1,0,0],[0,1,0],[0,0,"x"]]]})"),
      ParseError);
}

TEST_CASE("generic json: roundtrip of random sequences") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto seq = oracle::random_sequence(rng, 4 + trial % 9, 1 + trial % 4, 1e3);
    if (trial % 2) seq.label = "c" + std::to_string(trial);
    seq.fps = 12.5 + trial;
    const auto back = parse_generic_json(to_generic_json(seq), seq.source_id);
    CHECK(back == seq);
  }
}

TEST_CASE("interleave_bodies") {
  auto make = [](std::initializer_list<double> xs) {
    SkeletonSequence s;
    s.layout = SkeletonLayout::generic(4);
    for (double x : xs) s.frames.push_back({{{x, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}}});
    return s;
  };
  const auto a = make({1, 2});
  const auto b = make({-1, -2});
  auto out = interleave_bodies(a, b);
  REQUIRE(out.size() == 4);
  CHECK(out.frames[0] == a.frames[0]);
  CHECK(out.frames[1] == b.frames[0]);
  CHECK(out.frames[2] == a.frames[1]);
  CHECK(out.frames[3] == b.frames[1]);
  CHECK(out.fps == 2 * a.fps);

  const auto short_b = make({-1});
  out = interleave_bodies(a, short_b);
  REQUIRE(out.size() == 4);
  CHECK(out.frames[3] == short_b.frames[0]);

  SUBCASE("length is twice the longer input") {
    for (int la = 1; la < 6; ++la) {
      for (int lb = 1; lb < 6; ++lb) {
        std::mt19937_64 rng(la * 10 + lb);
        const auto x = oracle::random_sequence(rng, 5, la);
        const auto y = oracle::random_sequence(rng, 5, lb);
        CHECK(interleave_bodies(x, y).size() == 2u * std::max(la, lb));
      }
    }
  }

  SUBCASE("layout mismatch") {
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(interleave_bodies(oracle::random_sequence(rng, 25, 2),
                                      oracle::random_sequence(rng, 20, 2)),
                    ValidationError);
  }
}

TEST_CASE("merge_tracks picks the two longest tracks") {
  std::mt19937_64 rng(3);
  auto a = oracle::random_sequence(rng, 25, 2);
  auto b = oracle::random_sequence(rng, 25, 6);
  auto c = oracle::random_sequence(rng, 25, 4);
  const std::vector<SkeletonSequence> tracks{a, b, c};
  const auto merged = merge_tracks(tracks);
  CHECK(merged.size() == 12);
  CHECK(merged.frames[0] == b.frames[0]);
  CHECK(merged.frames[1] == c.frames[0]);
  CHECK(merged.frames[11] == c.frames[3]);
  const std::vector<SkeletonSequence> one{a};
  CHECK(merge_tracks(one) == a);
}

TEST_CASE("manifest parse and validation") {
  const auto m = parse_manifest(R"({"layout":{"joints":25,"hip":0,"left_shoulder":4,"right_shoulder":8},
    "entries":[{"path":"a.json","label":"x","split":"train"},{"path":"b.json","label":"y","split":"test"}]})");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[1].split == Split::kTest);
  CHECK(parse_manifest(to_manifest_json(m)) == m);
  CHECK_THROWS(parse_manifest(R"({"entries":[{"path":"a","label":"x","split":"train"},{"path":"a","label":"y","split":"test"}]})"));
  CHECK_THROWS(parse_manifest(R"({"entries":[{"path":"a","label":"x","split":"holdout"}]})"));
  const auto bare = parse_manifest(R"([{"path":"a","label":"x","split":"val"}])");
  CHECK(bare.entries[0].split == Split::kVal);
}
