#include "skepxel/skeleton.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace skepxel {

using nlohmann::json;

double dot(const Vec3& a, const Vec3& b) noexcept {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double norm(const Vec3& v) noexcept { return std::sqrt(dot(v, v)); }

bool is_finite(const Vec3& v) noexcept {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

void SkeletonLayout::validate() const {
  if (joint_count < 4) {
    throw ValidationError("layout '" + name + "': joint_count must be >= 4, got " +
                          std::to_string(joint_count));
  }
  for (int idx : {hip, left_shoulder, right_shoulder}) {
    if (idx < 0 || idx >= joint_count) {
      throw ValidationError("layout '" + name + "': anatomical index " +
                            std::to_string(idx) + " out of range [0, " +
                            std::to_string(joint_count) + ")");
    }
  }
  if (hip == left_shoulder || hip == right_shoulder ||
      left_shoulder == right_shoulder) {
    throw ValidationError("layout '" + name +
                          "': hip and shoulder indices must be distinct");
  }
}

SkeletonLayout SkeletonLayout::ntu25() { return {}; }

SkeletonLayout SkeletonLayout::generic(int joint_count) {
  if (joint_count == 25) return ntu25();
  return {joint_count, 0, 1, 2, "generic" + std::to_string(joint_count)};
}

void SkeletonSequence::validate() const {
  layout.validate();
  if (frames.empty()) throw EmptyInputError("sequence '" + source_id + "' has no frames");
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw ValidationError("sequence '" + source_id + "': fps must be positive");
  }
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& joints = frames[f].joints;
    if (joints.size() != static_cast<std::size_t>(layout.joint_count)) {
      throw ValidationError("sequence '" + source_id + "' frame " + std::to_string(f) +
                            ": expected " + std::to_string(layout.joint_count) +
                            " joints, got " + std::to_string(joints.size()));
    }
    for (const auto& j : joints) {
      if (!is_finite(j)) {
        throw ValidationError("sequence '" + source_id + "' frame " +
                              std::to_string(f) + ": non-finite coordinate");
      }
    }
  }
}

namespace {

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    ++number;
    std::string_view line = text.substr(pos, end - pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                             line.back() == '\t')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) {
      line.remove_prefix(1);
    }
    if (!line.empty()) lines.push_back({number, line});
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::size_t parse_count(const Line& line, std::string_view what) {
  const auto fields = split_fields(line.text);
  std::size_t value = 0;
  if (fields.size() != 1) {
    throw ParseError("expected a single " + std::string(what) + ", got '" +
                         std::string(line.text) + "'",
                     line.number);
  }
  const auto [ptr, ec] =
      std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), value);
  if (ec != std::errc() || ptr != fields[0].data() + fields[0].size()) {
    throw ParseError("malformed " + std::string(what) + " '" +
                         std::string(fields[0]) + "'",
                     line.number);
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string body_id_of(const SkeletonSequence& track, std::size_t index) {
  const auto hash = track.source_id.rfind('#');
  if (hash != std::string::npos && hash + 1 < track.source_id.size()) {
    return track.source_id.substr(hash + 1);
  }
  return std::to_string(index);
}

std::string strip_track_suffix(const std::string& source_id) {
  const auto hash = source_id.rfind('#');
  return hash == std::string::npos ? source_id : source_id.substr(0, hash);
}

}  // namespace

std::vector<SkeletonSequence> parse_ntu_skeleton(std::string_view text,
                                                 const SkeletonLayout& layout,
                                                 std::string_view source_id) {
  layout.validate();
  const auto lines = split_lines(text);
  if (lines.empty()) throw EmptyInputError("empty NTU skeleton input");

  std::size_t cursor = 0;
  std::size_t frames_read = 0;
  std::size_t frame_count = 0;
  auto next = [&](std::string_view expecting) -> const Line& {
    if (cursor >= lines.size()) {
      const std::size_t last = lines.back().number;
      throw ParseError("file declares " + std::to_string(frame_count) +
                           " frames but ends after " + std::to_string(frames_read) +
                           " complete frames (expected " + std::string(expecting) + ")",
                       last);
    }
    return lines[cursor++];
  };

  frame_count = parse_count(next("frame count"), "frame count");
  if (frame_count == 0) throw EmptyInputError("NTU skeleton file declares zero frames", lines[0].number);

  std::vector<std::string> order;
  std::map<std::string, SkeletonSequence> tracks;
  const auto joints = static_cast<std::size_t>(layout.joint_count);

  for (; frames_read < frame_count; ++frames_read) {
    const std::size_t bodies = parse_count(next("body count"), "body count");
    for (std::size_t b = 0; b < bodies; ++b) {
      const Line& info = next("body info line");
      const auto info_fields = split_fields(info.text);
      if (info_fields.empty()) throw ParseError("empty body info line", info.number);
      const std::string body_id(info_fields[0]);

      const Line& count_line = next("joint count");
      const std::size_t joint_count = parse_count(count_line, "joint count");
      if (joint_count != joints) {
        throw ParseError("joint count " + std::to_string(joint_count) +
                             " does not match layout (" + std::to_string(joints) + ")",
                         count_line.number);
      }

      SkeletonFrame frame;
      frame.joints.reserve(joints);
      for (std::size_t j = 0; j < joints; ++j) {
        const Line& jl = next("joint line");
        const auto fields = split_fields(jl.text);
        if (fields.size() < 3) {
          throw ParseError("joint line has " + std::to_string(fields.size()) +
                               " fields, need at least 3",
                           jl.number);
        }
        double xyz[3];
        for (int k = 0; k < 3; ++k) {
          if (!parse_double(fields[k], xyz[k])) {
            throw ParseError("non-numeric coordinate '" + std::string(fields[k]) + "'",
                             jl.number);
          }
          if (!std::isfinite(xyz[k])) {
            throw ParseError("non-finite coordinate '" + std::string(fields[k]) + "'",
                             jl.number);
          }
        }
        frame.joints.push_back({xyz[0], xyz[1], xyz[2]});
      }

      auto [it, inserted] = tracks.try_emplace(body_id);
      if (inserted) {
        order.push_back(body_id);
        it->second.layout = layout;
        it->second.fps = 30.0;
        it->second.source_id = std::string(source_id) + "#" + body_id;
      }
      it->second.frames.push_back(std::move(frame));
    }
  }
  if (cursor != lines.size()) {
    throw ParseError("unexpected trailing content after " + std::to_string(frame_count) +
                         " frames",
                     lines[cursor].number);
  }
  if (order.empty()) throw EmptyInputError("NTU skeleton file contains no bodies");

  std::vector<SkeletonSequence> out;
  out.reserve(order.size());
  for (const auto& id : order) out.push_back(std::move(tracks.at(id)));
  return out;
}

std::string write_ntu_skeleton(std::span<const SkeletonSequence> tracks) {
  std::size_t frame_count = 0;
  for (const auto& t : tracks) frame_count = std::max(frame_count, t.size());

  std::string out;
  out += std::to_string(frame_count) + "\n";
  for (std::size_t f = 0; f < frame_count; ++f) {
    std::size_t present = 0;
    for (const auto& t : tracks) present += f < t.size() ? 1 : 0;
    out += std::to_string(present) + "\n";
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      const auto& t = tracks[i];
      if (f >= t.size()) continue;
      out += body_id_of(t, i) + " 0 0 0 0 0 0 0 0 0\n";
      out += std::to_string(t.frames[f].joints.size()) + "\n";
      for (const auto& j : t.frames[f].joints) {
        out += format_double(j.x) + " " + format_double(j.y) + " " +
               format_double(j.z) + " 0 0 0 0 0 0 0 0 0\n";
      }
    }
  }
  return out;
}

SkeletonSequence parse_generic_json(std::string_view text, std::string_view source_id) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("skeleton document must be a JSON object");
  if (!doc.contains("joints") || !doc["joints"].is_number_integer()) {
    throw ParseError("'joints' must be an integer");
  }
  if (!doc.contains("fps") || !doc["fps"].is_number()) {
    throw ParseError("'fps' must be a number");
  }
  if (!doc.contains("frames") || !doc["frames"].is_array()) {
    throw ParseError("'frames' must be an array");
  }

  SkeletonSequence seq;
  const int joints = doc["joints"].get<int>();
  seq.layout = SkeletonLayout::generic(joints);
  if (doc.contains("layout")) {
    const auto& l = doc["layout"];
    if (!l.is_object()) throw ParseError("'layout' must be an object");
    try {
      seq.layout.hip = l.at("hip").get<int>();
      seq.layout.left_shoulder = l.at("left_shoulder").get<int>();
      seq.layout.right_shoulder = l.at("right_shoulder").get<int>();
      if (l.contains("name")) seq.layout.name = l["name"].get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad layout block: ") + e.what());
    }
  }
  seq.fps = doc["fps"].get<double>();
  if (doc.contains("label") && !doc["label"].is_null()) {
    if (!doc["label"].is_string()) throw ParseError("'label' must be a string");
    seq.label = doc["label"].get<std::string>();
  }
  seq.source_id = std::string(source_id);

  const auto& frames = doc["frames"];
  seq.frames.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& fr = frames[f];
    if (!fr.is_array()) throw ParseError("frame " + std::to_string(f) + " is not an array");
    if (fr.size() != static_cast<std::size_t>(joints)) {
      throw ValidationError("frame " + std::to_string(f) + " has " +
                            std::to_string(fr.size()) + " joints, expected " +
                            std::to_string(joints));
    }
    SkeletonFrame frame;
    frame.joints.reserve(fr.size());
    for (std::size_t j = 0; j < fr.size(); ++j) {
      const auto& p = fr[j];
      if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() ||
          !p[2].is_number()) {
        throw ParseError("frame " + std::to_string(f) + " joint " + std::to_string(j) +
                         " must be [x, y, z]");
      }
      frame.joints.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    seq.frames.push_back(std::move(frame));
  }
  seq.validate();
  return seq;
}

std::string to_generic_json(const SkeletonSequence& seq) {
  json doc;
  doc["joints"] = seq.layout.joint_count;
  doc["fps"] = seq.fps;
  if (seq.label) doc["label"] = *seq.label;
  doc["layout"] = {{"hip", seq.layout.hip},
                   {"left_shoulder", seq.layout.left_shoulder},
                   {"right_shoulder", seq.layout.right_shoulder},
                   {"name", seq.layout.name}};
  json frames = json::array();
  for (const auto& fr : seq.frames) {
    json joints = json::array();
    for (const auto& j : fr.joints) joints.push_back({j.x, j.y, j.z});
    frames.push_back(std::move(joints));
  }
  doc["frames"] = std::move(frames);
  return doc.dump();
}

SkeletonSequence interleave_bodies(const SkeletonSequence& a, const SkeletonSequence& b) {
  if (a.layout != b.layout) {
    throw ValidationError("cannot interleave bodies with different layouts (" +
                          std::to_string(a.layout.joint_count) + " vs " +
                          std::to_string(b.layout.joint_count) + " joints)");
  }
  if (a.frames.empty() || b.frames.empty()) {
    throw EmptyInputError("cannot interleave an empty body track");
  }
  SkeletonSequence out;
  out.layout = a.layout;
  out.fps = 2.0 * a.fps;
  out.label = a.label ? a.label : b.label;
  out.source_id = a.source_id;
  const std::size_t len = std::max(a.size(), b.size());
  out.frames.reserve(2 * len);
  for (std::size_t f = 0; f < len; ++f) {
    out.frames.push_back(a.frames[std::min(f, a.size() - 1)]);
    out.frames.push_back(b.frames[std::min(f, b.size() - 1)]);
  }
  return out;
}

SkeletonSequence merge_tracks(std::span<const SkeletonSequence> tracks) {
  if (tracks.empty()) throw EmptyInputError("no body tracks to merge");
  if (tracks.size() == 1) {
    SkeletonSequence only = tracks[0];
    only.source_id = strip_track_suffix(only.source_id);
    return only;
  }
  std::vector<std::size_t> idx(tracks.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
    return tracks[l].size() > tracks[r].size();
  });
  const std::size_t first = std::min(idx[0], idx[1]);
  const std::size_t second = std::max(idx[0], idx[1]);
  SkeletonSequence merged = interleave_bodies(tracks[first], tracks[second]);
  merged.source_id = strip_track_suffix(merged.source_id);
  return merged;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

SkeletonSequence load_sequence(const std::filesystem::path& path,
                               const SkeletonLayout& layout) {
  const std::string text = read_text_file(path);
  const std::string stem = path.stem().string();
  if (path.extension() == ".skeleton") {
    const auto tracks = parse_ntu_skeleton(text, layout, stem);
    return merge_tracks(tracks);
  }
  SkeletonSequence seq = parse_generic_json(text, stem);
  if (seq.layout.joint_count != layout.joint_count) {
    throw ValidationError("'" + path.string() + "' has " +
                          std::to_string(seq.layout.joint_count) +
                          " joints, manifest layout expects " +
                          std::to_string(layout.joint_count));
  }
  seq.layout = layout;
  return seq;
}

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kVal: return "val";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  if (text == "val") return Split::kVal;
  throw ValidationError("split must be train, test or val, got '" + std::string(text) + "'");
}

void DatasetManifest::validate() const {
  layout.validate();
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.path).second) {
      throw ValidationError("duplicate manifest path '" + e.path + "'");
    }
  }
}

namespace {

SkeletonLayout layout_from_json(const json& l) {
  SkeletonLayout layout;
  layout.joint_count = l.value("joints", 25);
  layout = SkeletonLayout::generic(layout.joint_count);
  layout.hip = l.value("hip", layout.hip);
  layout.left_shoulder = l.value("left_shoulder", layout.left_shoulder);
  layout.right_shoulder = l.value("right_shoulder", layout.right_shoulder);
  layout.name = l.value("name", layout.name);
  return layout;
}

}  // namespace

DatasetManifest parse_manifest(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid manifest JSON: ") + e.what());
  }
  DatasetManifest manifest;
  const json* entries = &doc;
  try {
    if (doc.is_object()) {
      if (doc.contains("layout")) manifest.layout = layout_from_json(doc["layout"]);
      entries = &doc.at("entries");
    }
    if (!entries->is_array()) throw ParseError("manifest entries must be an array");
    for (const auto& e : *entries) {
      manifest.entries.push_back({e.at("path").get<std::string>(),
                                  e.at("label").get<std::string>(),
                                  parse_split(e.at("split").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
  manifest.validate();
  return manifest;
}

std::string to_manifest_json(const DatasetManifest& manifest) {
  json doc;
  doc["layout"] = {{"joints", manifest.layout.joint_count},
                   {"hip", manifest.layout.hip},
                   {"left_shoulder", manifest.layout.left_shoulder},
                   {"right_shoulder", manifest.layout.right_shoulder},
                   {"name", manifest.layout.name}};
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"path", e.path}, {"label", e.label}, {"split", to_string(e.split)}});
  }
  doc["entries"] = std::move(entries);
  return doc.dump(2);
}

}  // namespace skepxel
