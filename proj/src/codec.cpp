#include "skepxel/codec.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace skepxel {

using nlohmann::json;

std::string_view to_string(ImageKind kind) noexcept {
  switch (kind) {
    case ImageKind::kLocation: return "location";
    case ImageKind::kVelocity: return "velocity";
    case ImageKind::kLocationVelocity: return "location+velocity";
  }
  return "location";
}

ImageKind parse_image_kind(std::string_view text) {
  if (text == "location" || text == "loc") return ImageKind::kLocation;
  if (text == "velocity" || text == "vel") return ImageKind::kVelocity;
  if (text == "location+velocity" || text == "locvel" || text == "loc+vel") {
    return ImageKind::kLocationVelocity;
  }
  throw ValidationError("unknown image kind '" + std::string(text) + "'");
}

std::string_view to_string(ExportMode mode) noexcept {
  return mode == ExportMode::kPng8 ? "png8" : "raw-f32";
}

ExportMode parse_export_mode(std::string_view text) {
  if (text == "raw-f32" || text == "raw") return ExportMode::kRawF32;
  if (text == "png8" || text == "png") return ExportMode::kPng8;
  throw ValidationError("unknown export mode '" + std::string(text) + "'");
}

namespace {

void check_frame(const SkeletonFrame& frame, const Arrangement& arrangement) {
  if (frame.joints.size() != static_cast<std::size_t>(arrangement.joint_count())) {
    throw ValidationError("frame has " + std::to_string(frame.joints.size()) +
                          " joints but the arrangement covers " +
                          std::to_string(arrangement.joint_count()));
  }
}

// Writes frame tensors for `frames` side by side into channels
// [channel_offset, channel_offset + 3) of `out`.
void fill_blocks(std::span<const SkeletonFrame> frames, const ArrangementSet& set,
                 ImageF& out, std::size_t channel_offset) {
  const int h = set.h();
  const int w = set.w();
  for (const auto& frame : frames) check_frame(frame, set.members[0]);
  for (std::size_t b = 0; b < set.members.size(); ++b) {
    const auto& grid = set.members[b].grid();
    for (int r = 0; r < h; ++r) {
      const std::size_t row = b * static_cast<std::size_t>(h) + static_cast<std::size_t>(r);
      for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& joints = frames[f].joints;
        float* px = &out(row, f * static_cast<std::size_t>(w), channel_offset);
        const std::size_t c_stride = out.channels();
        for (int c = 0; c < w; ++c, px += c_stride) {
          const Vec3& p = joints[static_cast<std::size_t>(grid[r * w + c])];
          px[0] = static_cast<float>(p.x);
          px[1] = static_cast<float>(p.y);
          px[2] = static_cast<float>(p.z);
        }
      }
    }
  }
}

std::vector<SkeletonFrame> differences(const std::vector<SkeletonFrame>& frames) {
  if (frames.size() < 2) throw ValidationError("velocity images need n >= 2");
  std::vector<SkeletonFrame> diffs(frames.size());
  for (std::size_t f = 0; f + 1 < frames.size(); ++f) {
    const auto& a = frames[f].joints;
    const auto& b = frames[f + 1].joints;
    diffs[f].joints.resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) diffs[f].joints[j] = b[j] - a[j];
  }
  diffs.back() = diffs[diffs.size() - 2];
  return diffs;
}

void check_set(const ArrangementSet& set) {
  if (set.members.empty()) throw ValidationError("arrangement set is empty");
}

ImageF blank_image(const ArrangementSet& set, int n, std::size_t channels) {
  return ImageF(static_cast<std::size_t>(set.m()) * static_cast<std::size_t>(set.h()),
                static_cast<std::size_t>(n) * static_cast<std::size_t>(set.w()), channels);
}

}  // namespace

Skepxel build_skepxel(const SkeletonFrame& frame, const Arrangement& arrangement) {
  check_frame(frame, arrangement);
  Skepxel out{ImageF(static_cast<std::size_t>(arrangement.h()),
                     static_cast<std::size_t>(arrangement.w()), 3)};
  for (int r = 0; r < arrangement.h(); ++r) {
    for (int c = 0; c < arrangement.w(); ++c) {
      const Vec3& p = frame.joints[static_cast<std::size_t>(arrangement.at(r, c))];
      for (std::size_t ch = 0; ch < 3; ++ch) out.data(r, c, ch) = static_cast<float>(p[ch]);
    }
  }
  return out;
}

FrameTensor build_frame_tensor(const SkeletonFrame& frame, const ArrangementSet& set) {
  check_set(set);
  FrameTensor out{blank_image(set, 1, 3), set.m()};
  fill_blocks(std::span(&frame, 1), set, out.data, 0);
  return out;
}

WindowPlan plan_windows(std::size_t seq_len, int n, int stride) {
  if (seq_len == 0) throw ValidationError("cannot plan windows over an empty sequence");
  if (n < 2) throw ValidationError("window length n must be >= 2");
  if (stride < 1) throw ValidationError("window stride must be >= 1");
  WindowPlan plan;
  plan.n = n;
  plan.stride = stride;
  const auto len = static_cast<std::size_t>(n);
  if (seq_len < len) {
    const double step = static_cast<double>(seq_len - 1) / static_cast<double>(n - 1);
    plan.windows.push_back({0.0, step, n});
    return plan;
  }
  std::size_t start = 0;
  for (; start + len <= seq_len; start += static_cast<std::size_t>(stride)) {
    plan.windows.push_back({static_cast<double>(start), 1.0, n});
  }
  const std::size_t last = static_cast<std::size_t>(plan.windows.back().start);
  if (last + len < seq_len) {
    plan.windows.push_back({static_cast<double>(seq_len - len), 1.0, n});
  }
  return plan;
}

std::vector<SkeletonFrame> sample_frames(const SkeletonSequence& seq, const WindowSpan& span) {
  if (seq.frames.empty()) throw ValidationError("cannot sample an empty sequence");
  if (span.n < 1) throw ValidationError("window must contain at least one sample");
  const double last = static_cast<double>(seq.frames.size() - 1);
  std::vector<SkeletonFrame> out;
  out.reserve(static_cast<std::size_t>(span.n));
  for (int i = 0; i < span.n; ++i) {
    double t = span.position(i);
    if (t > last && t - last < 1e-9) t = last;
    if (!(t >= 0.0 && t <= last)) {
      throw ValidationError("window position " + std::to_string(t) +
                            " outside sequence of " + std::to_string(seq.frames.size()) +
                            " frames");
    }
    const double lo = std::floor(t);
    const auto k = static_cast<std::size_t>(lo);
    const double frac = t - lo;
    if (frac == 0.0) {
      out.push_back(seq.frames[k]);
      continue;
    }
    const auto& a = seq.frames[k].joints;
    const auto& b = seq.frames[k + 1].joints;
    SkeletonFrame frame;
    frame.joints.resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      frame.joints[j] = a[j] + frac * (b[j] - a[j]);
    }
    out.push_back(std::move(frame));
  }
  return out;
}

SkeletalImage build_location_image(const SkeletonSequence& seq, const ArrangementSet& set,
                                   const WindowSpan& span) {
  check_set(set);
  const auto frames = sample_frames(seq, span);
  SkeletalImage img{blank_image(set, span.n, 3), span, set.id(), ImageKind::kLocation};
  fill_blocks(frames, set, img.data, 0);
  return img;
}

SkeletalImage build_velocity_image(const SkeletonSequence& seq, const ArrangementSet& set,
                                   const WindowSpan& span) {
  check_set(set);
  if (span.n < 2) throw ValidationError("velocity images need n >= 2");
  const auto diffs = differences(sample_frames(seq, span));
  SkeletalImage img{blank_image(set, span.n, 3), span, set.id(), ImageKind::kVelocity};
  fill_blocks(diffs, set, img.data, 0);
  return img;
}

SkeletalImage compose_locvel(const SkeletalImage& loc, const SkeletalImage& vel) {
  if (loc.data.channels() != 3 || vel.data.channels() != 3) {
    throw ValidationError("compose_locvel expects two 3-channel images");
  }
  if (loc.kind != ImageKind::kLocation || vel.kind != ImageKind::kVelocity) {
    throw ValidationError("compose_locvel expects a location and a velocity image");
  }
  if (loc.data.height() != vel.data.height() || loc.data.width() != vel.data.width()) {
    throw ValidationError("location and velocity images differ in shape");
  }
  if (!(loc.window == vel.window) || loc.arrangement_set_id != vel.arrangement_set_id) {
    throw ValidationError("location and velocity images come from different windows or sets");
  }
  SkeletalImage out{ImageF(loc.data.height(), loc.data.width(), 6), loc.window,
                    loc.arrangement_set_id, ImageKind::kLocationVelocity};
  const auto l = loc.data.values();
  const auto v = vel.data.values();
  auto o = out.data.values();
  for (std::size_t px = 0; px < l.size() / 3; ++px) {
    std::memcpy(&o[px * 6], &l[px * 3], 3 * sizeof(float));
    std::memcpy(&o[px * 6 + 3], &v[px * 3], 3 * sizeof(float));
  }
  return out;
}

SkeletalImage build_image(const SkeletonSequence& seq, const ArrangementSet& set,
                          const WindowSpan& span, ImageKind kind) {
  switch (kind) {
    case ImageKind::kLocation: return build_location_image(seq, set, span);
    case ImageKind::kVelocity: return build_velocity_image(seq, set, span);
    case ImageKind::kLocationVelocity: break;
  }
  check_set(set);
  if (span.n < 2) throw ValidationError("velocity images need n >= 2");
  const auto frames = sample_frames(seq, span);
  const auto diffs = differences(frames);
  SkeletalImage img{blank_image(set, span.n, 6), span, set.id(),
                    ImageKind::kLocationVelocity};
  fill_blocks(frames, set, img.data, 0);
  fill_blocks(diffs, set, img.data, 3);
  return img;
}

SkeletonSequence pad_joints(const SkeletonSequence& seq, int target_joints,
                            std::span<const std::pair<int, int>> recipe) {
  const int current = seq.layout.joint_count;
  if (target_joints < current) {
    throw ValidationError("pad target " + std::to_string(target_joints) +
                          " is below the current joint count " + std::to_string(current));
  }
  if (recipe.size() != static_cast<std::size_t>(target_joints - current)) {
    throw ValidationError("pad recipe has " + std::to_string(recipe.size()) +
                          " pairs, need " + std::to_string(target_joints - current));
  }
  for (std::size_t k = 0; k < recipe.size(); ++k) {
    const int limit = current + static_cast<int>(k);
    if (recipe[k].first < 0 || recipe[k].first >= limit || recipe[k].second < 0 ||
        recipe[k].second >= limit) {
      throw ValidationError("pad recipe pair " + std::to_string(k) +
                            " references a joint that does not exist yet");
    }
  }
  SkeletonSequence out = seq;
  out.layout.joint_count = target_joints;
  for (auto& frame : out.frames) {
    frame.joints.reserve(static_cast<std::size_t>(target_joints));
    for (const auto& [a, b] : recipe) {
      const Vec3 pa = frame.joints[static_cast<std::size_t>(a)];
      const Vec3 pb = frame.joints[static_cast<std::size_t>(b)];
      frame.joints.push_back(0.5 * (pa + pb));
    }
  }
  return out;
}

namespace {

constexpr char kRawMagic[4] = {'S', 'K', 'P', 'X'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[offset + b]) << (8 * b);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_raw(const ImageF& image) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + image.size() * 4);
  out.insert(out.end(), kRawMagic, kRawMagic + 4);
  put_u32(out, static_cast<std::uint32_t>(image.height()));
  put_u32(out, static_cast<std::uint32_t>(image.width()));
  put_u32(out, static_cast<std::uint32_t>(image.channels()));
  for (float v : image.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

ImageF decode_raw(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kRawMagic, 4) != 0) {
    throw ParseError("not a SKPX raw image");
  }
  const std::size_t h = get_u32(bytes, 4);
  const std::size_t w = get_u32(bytes, 8);
  const std::size_t c = get_u32(bytes, 12);
  if (bytes.size() != 16 + h * w * c * 4) {
    throw ParseError("SKPX payload size does not match header " + std::to_string(h) + "x" +
                     std::to_string(w) + "x" + std::to_string(c));
  }
  ImageF image(h, w, c);
  auto dst = image.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = std::bit_cast<float>(get_u32(bytes, 16 + 4 * i));
  }
  return image;
}

namespace {

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

[[noreturn]] void png_fail(png_structp, png_const_charp message) {
  throw Error(std::string("PNG error: ") + message);
}

void png_ignore_warning(png_structp, png_const_charp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const ImageU8& pixels) {
  if (pixels.channels() != 3) throw ValidationError("PNG export expects 3 channels");
  std::vector<std::uint8_t> out;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_ignore_warning);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};
  if (!info) throw Error("png_create_info_struct failed");

  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        buf->insert(buf->end(), data, data + len);
      },
      [](png_structp) {});
  png_set_IHDR(png, info, static_cast<png_uint_32>(pixels.width()),
               static_cast<png_uint_32>(pixels.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = pixels.width() * 3;
  for (std::size_t r = 0; r < pixels.height(); ++r) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + r * stride));
  }
  png_write_end(png, nullptr);
  return out;
}

ImageU8 decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw ParseError("not a PNG file");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_ignore_warning);
  if (!png) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};
  if (!info) throw Error("png_create_info_struct failed");

  PngReadCursor cursor{bytes, 0};
  png_set_read_fn(png, &cursor, [](png_structp p, png_bytep data, png_size_t len) {
    auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(p));
    if (cur->offset + len > cur->bytes.size()) png_error(p, "truncated PNG");
    std::memcpy(data, cur->bytes.data() + cur->offset, len);
    cur->offset += len;
  });
  png_read_info(png, info);
  if (png_get_bit_depth(png, info) != 8 || png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB) {
    throw ParseError("expected an 8-bit RGB PNG");
  }
  const std::size_t w = png_get_image_width(png, info);
  const std::size_t h = png_get_image_height(png, info);
  ImageU8 pixels(h, w, 3);
  for (std::size_t r = 0; r < h; ++r) png_read_row(png, pixels.data() + r * w * 3, nullptr);
  png_read_end(png, nullptr);
  return pixels;
}

std::string to_json(const ImageMetadata& meta) {
  json doc;
  doc["source"] = meta.source;
  doc["label"] = meta.label ? json(*meta.label) : json(nullptr);
  doc["window"] = {meta.window.start, meta.window.n};
  doc["window_step"] = meta.window.step;
  doc["stride"] = meta.stride;
  doc["arrangement_set"] = meta.arrangement_set;
  doc["kind"] = std::string(to_string(meta.kind));
  doc["fps"] = meta.fps;
  if (!meta.scale.empty()) {
    json scale = json::array();
    for (const auto& s : meta.scale) scale.push_back({s.min, s.max});
    doc["scale"] = std::move(scale);
  }
  return doc.dump();
}

ImageMetadata image_metadata_from_json(std::string_view text) {
  ImageMetadata meta;
  try {
    const json doc = json::parse(text);
    meta.source = doc.at("source").get<std::string>();
    if (doc.contains("label") && doc["label"].is_string()) {
      meta.label = doc["label"].get<std::string>();
    }
    meta.window.start = doc.at("window").at(0).get<double>();
    meta.window.n = doc.at("window").at(1).get<int>();
    meta.window.step = doc.value("window_step", 1.0);
    meta.stride = doc.value("stride", 0);
    meta.arrangement_set = doc.value("arrangement_set", std::string{});
    meta.kind = parse_image_kind(doc.at("kind").get<std::string>());
    meta.fps = doc.value("fps", 0.0);
    if (doc.contains("scale")) {
      for (const auto& s : doc["scale"]) {
        const double lo = s.at(0).get<double>();
        const double hi = s.at(1).get<double>();
        meta.scale.push_back({lo, hi, !(hi > lo)});
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed image metadata: ") + e.what());
  }
  return meta;
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

ExportedFiles export_image(const SkeletalImage& image, ImageMetadata meta, ExportMode mode,
                           const std::filesystem::path& directory, const std::string& stem) {
  ExportedFiles files;
  meta.kind = image.kind;
  meta.window = image.window;
  meta.arrangement_set = image.arrangement_set_id;
  json extra;
  extra["format"] = std::string(to_string(mode));
  json names = json::array();

  if (mode == ExportMode::kRawF32) {
    meta.scale.clear();
    const auto path = directory / (stem + ".skpx");
    write_binary_file(path, encode_raw(image.data));
    files.data_files.push_back(path);
    names.push_back(path.filename().string());
  } else {
    if (image.data.channels() % 3 != 0) {
      throw ValidationError("png8 export needs a multiple of 3 channels");
    }
    const ScaledImage scaled = scale_channels(image.data);
    meta.scale = scaled.scales;
    const std::size_t groups = image.data.channels() / 3;
    for (std::size_t g = 0; g < groups; ++g) {
      ImageU8 rgb(image.data.height(), image.data.width(), 3);
      auto src = scaled.pixels.values();
      auto dst = rgb.values();
      const std::size_t c = image.data.channels();
      for (std::size_t px = 0; px < dst.size() / 3; ++px) {
        for (std::size_t k = 0; k < 3; ++k) dst[px * 3 + k] = src[px * c + g * 3 + k];
      }
      const auto path = directory / (stem + "_" + std::to_string(g) + ".png");
      write_binary_file(path, encode_png(rgb));
      files.data_files.push_back(path);
      names.push_back(path.filename().string());
    }
  }
  json doc = json::parse(to_json(meta));
  doc["format"] = extra["format"];
  doc["files"] = std::move(names);
  doc["shape"] = {image.data.height(), image.data.width(), image.data.channels()};
  files.sidecar = directory / (stem + ".json");
  write_text_file(files.sidecar, doc.dump());
  return files;
}

SkeletalImage import_image(const std::filesystem::path& sidecar) {
  const std::string text = read_text_file(sidecar);
  const ImageMetadata meta = image_metadata_from_json(text);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed image metadata: ") + e.what());
  }
  const auto dir = sidecar.parent_path();
  const auto mode = parse_export_mode(doc.value("format", std::string("raw-f32")));
  const auto names = doc.value("files", std::vector<std::string>{});
  if (names.empty()) throw ParseError("image sidecar lists no data files");

  SkeletalImage img;
  img.window = meta.window;
  img.arrangement_set_id = meta.arrangement_set;
  img.kind = meta.kind;
  if (mode == ExportMode::kRawF32) {
    img.data = decode_raw(read_binary_file(dir / names[0]));
    return img;
  }
  std::vector<ImageU8> groups;
  for (const auto& name : names) groups.push_back(decode_png(read_binary_file(dir / name)));
  const std::size_t c = groups.size() * 3;
  ImageU8 merged(groups[0].height(), groups[0].width(), c);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].height() != merged.height() || groups[g].width() != merged.width()) {
      throw ParseError("PNG channel groups differ in size");
    }
    auto src = groups[g].values();
    auto dst = merged.values();
    for (std::size_t px = 0; px < src.size() / 3; ++px) {
      for (std::size_t k = 0; k < 3; ++k) dst[px * c + g * 3 + k] = src[px * 3 + k];
    }
  }
  img.data = unscale_channels(merged, meta.scale);
  return img;
}

}  // namespace skepxel
