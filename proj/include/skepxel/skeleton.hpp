#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skepxel/error.hpp"

namespace skepxel {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](std::size_t i) const noexcept {
    return i == 0 ? x : (i == 1 ? y : z);
  }
  constexpr Vec3& operator+=(const Vec3& o) noexcept {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) noexcept {
    x -= o.x; y -= o.y; z -= o.z;
    return *this;
  }
  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) noexcept { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) noexcept { return a -= b; }
  friend constexpr Vec3 operator*(double s, const Vec3& v) noexcept {
    return {s * v.x, s * v.y, s * v.z};
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

double dot(const Vec3& a, const Vec3& b) noexcept;
Vec3 cross(const Vec3& a, const Vec3& b) noexcept;
double norm(const Vec3& v) noexcept;
bool is_finite(const Vec3& v) noexcept;

// Joint count and the anatomical joints used for pose normalization.
// Indices are 0-based.
struct SkeletonLayout {
  int joint_count = 25;
  int hip = 0;
  int left_shoulder = 4;
  int right_shoulder = 8;
  std::string name = "ntu25";

  // Throws ValidationError when an invariant is broken.
  void validate() const;

  // Public NTU RGB+D 25-joint layout: spine base, left shoulder, right
  // shoulder.
  static SkeletonLayout ntu25();
  // Layout used when a generic file carries no explicit anatomy block.
  static SkeletonLayout generic(int joint_count);

  friend bool operator==(const SkeletonLayout&, const SkeletonLayout&) = default;
};

struct SkeletonFrame {
  std::vector<Vec3> joints;
  friend bool operator==(const SkeletonFrame&, const SkeletonFrame&) = default;
};

struct SkeletonSequence {
  SkeletonLayout layout;
  std::vector<SkeletonFrame> frames;
  double fps = 30.0;
  std::optional<std::string> label;
  std::string source_id;

  std::size_t size() const noexcept { return frames.size(); }
  int joint_count() const noexcept { return layout.joint_count; }

  // At least one frame, every frame has layout.joint_count finite joints.
  void validate() const;

  friend bool operator==(const SkeletonSequence&, const SkeletonSequence&) = default;
};

// NTU RGB+D `.skeleton` text. Returns one sequence per distinct body ID in
// order of first appearance. source_id of each track is
// "<source_id>#<body id>".
std::vector<SkeletonSequence> parse_ntu_skeleton(
    std::string_view text, const SkeletonLayout& layout = SkeletonLayout::ntu25(),
    std::string_view source_id = {});

// Writes tracks back into NTU layout. Tracks may differ in length; frame f
// lists every track that still has a frame at f. The body ID of track i is
// taken from the text after '#' in its source_id, or i when absent. Unused
// per-joint fields are written as zeros.
std::string write_ntu_skeleton(std::span<const SkeletonSequence> tracks);

// Generic JSON interchange:
// {"joints":J,"fps":f,"label":s?,"layout":{"hip":i,"left_shoulder":i,
//  "right_shoulder":i}?,"frames":[[[x,y,z] x J] x F]}
SkeletonSequence parse_generic_json(std::string_view text,
                                    std::string_view source_id = {});
std::string to_generic_json(const SkeletonSequence& seq);

// Alternates frames of two bodies: a1, b1, a2, b2, ... The shorter track
// repeats its last frame. Output fps is twice the input fps.
SkeletonSequence interleave_bodies(const SkeletonSequence& a,
                                   const SkeletonSequence& b);

// Collapses the tracks of one recording into a single sequence: a lone track
// is returned unchanged; otherwise the two longest tracks (earliest first
// on equal length) are interleaved.
SkeletonSequence merge_tracks(std::span<const SkeletonSequence> tracks);

// Reads a skeleton file by extension: `.skeleton` as NTU, anything else as
// generic JSON. NTU recordings are merged with merge_tracks.
SkeletonSequence load_sequence(const std::filesystem::path& path,
                               const SkeletonLayout& layout);

enum class Split { kTrain, kTest, kVal };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view text);

struct ManifestEntry {
  std::string path;
  std::string label;
  Split split = Split::kTrain;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  SkeletonLayout layout;

  // Unique paths, valid layout.
  void validate() const;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// {"layout":{"joints":J,"hip":i,"left_shoulder":i,"right_shoulder":i,
//  "name":s},"entries":[{"path":p,"label":l,"split":"train"|"test"|"val"}]}
DatasetManifest parse_manifest(std::string_view text);
std::string to_manifest_json(const DatasetManifest& manifest);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace skepxel
