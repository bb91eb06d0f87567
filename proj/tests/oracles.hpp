#pragma once

// Slow, obviously-correct reference implementations and fixtures shared by
// the unit suites and the acceptance binary. Nothing here calls into the
// library's fast paths.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "skepxel/arrangement.hpp"
#include "skepxel/skeleton.hpp"

namespace oracle {

// The scatter metric as the textbook triple loop over members j, joints i
// and other members q.
inline long long naive_metric(const std::vector<std::vector<int>>& grids, int h, int w) {
  const int joints = h * w;
  auto locate = [&](const std::vector<int>& g, int joint, int& r, int& c) {
    for (int cell = 0; cell < joints; ++cell) {
      if (g[cell] == joint) {
        r = cell / w;
        c = cell % w;
        return;
      }
    }
    std::abort();
  };
  long long total = 0;
  for (std::size_t j = 0; j < grids.size(); ++j) {
    for (int i = 0; i < joints; ++i) {
      int x = 0, y = 0;
      locate(grids[j], i, x, y);
      for (std::size_t q = 0; q < grids.size(); ++q) {
        if (q == j) continue;
        int xq = 0, yq = 0;
        locate(grids[q], i, xq, yq);
        total += std::max(std::abs(x - xq), std::abs(y - yq));
      }
    }
  }
  return total;
}

// All (h*w)! grids in lexicographic order.
inline std::vector<std::vector<int>> all_grids(int h, int w) {
  std::vector<int> g(static_cast<std::size_t>(h * w));
  for (int i = 0; i < h * w; ++i) g[i] = i;
  std::vector<std::vector<int>> out;
  do {
    out.push_back(g);
  } while (std::next_permutation(g.begin(), g.end()));
  return out;
}

// |X_k| for k < z from the O(L^2) definition with std::complex and fresh
// sin/cos per term.
inline std::vector<double> naive_dft_magnitudes(std::span<const double> x, int z) {
  const std::size_t len = x.size();
  std::vector<double> out(static_cast<std::size_t>(z), 0.0);
  for (int k = 0; k < z; ++k) {
    if (static_cast<std::size_t>(k) >= len) break;
    std::complex<long double> acc = 0;
    for (std::size_t t = 0; t < len; ++t) {
      const long double angle = -2.0L * std::numbers::pi_v<long double> * k * t / len;
      acc += static_cast<long double>(x[t]) * std::complex<long double>(std::cos(angle), std::sin(angle));
    }
    out[k] = static_cast<double>(std::abs(acc));
  }
  return out;
}

// Nearest class mean by Euclidean distance.
inline std::string nearest_centroid(const std::map<std::string, std::vector<double>>& centroids,
                                    std::span<const double> x) {
  std::string best;
  double best_d = INFINITY;
  for (const auto& [label, c] : centroids) {
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - c[i]) * (x[i] - c[i]);
    if (d < best_d) {
      best_d = d;
      best = label;
    }
  }
  return best;
}

inline skepxel::SkeletonSequence random_sequence(std::mt19937_64& rng, int joints, int frames,
                                                 double spread = 1.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  skepxel::SkeletonSequence seq;
  seq.layout = skepxel::SkeletonLayout::generic(joints);
  seq.fps = 30.0;
  seq.source_id = "rand";
  seq.frames.resize(static_cast<std::size_t>(frames));
  for (auto& f : seq.frames) {
    f.joints.resize(static_cast<std::size_t>(joints));
    for (auto& j : f.joints) j = {u(rng), u(rng), u(rng)};
  }
  return seq;
}

inline skepxel::SkeletonSequence constant_sequence(int joints, int frames, double base = 0.5) {
  skepxel::SkeletonSequence seq;
  seq.layout = skepxel::SkeletonLayout::generic(joints);
  seq.source_id = "static";
  skepxel::SkeletonFrame f;
  for (int j = 0; j < joints; ++j) f.joints.push_back({base + j, -0.25 * j, 0.125 * j});
  seq.frames.assign(static_cast<std::size_t>(frames), f);
  return seq;
}

// p_j(t) = p_j(0) + t * d with a dyadic step so every difference is exact.
inline skepxel::SkeletonSequence linear_sequence(int joints, int frames, skepxel::Vec3 d) {
  auto seq = constant_sequence(joints, frames);
  for (int t = 0; t < frames; ++t) {
    for (auto& j : seq.frames[t].joints) j += static_cast<double>(t) * d;
  }
  seq.source_id = "linear";
  return seq;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("skepxel_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
