#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skepxel/error.hpp"

namespace skepxel {

// A permutation of joint indices laid out row-major on an h x w grid.
class Arrangement {
 public:
  Arrangement() = default;
  // Throws ValidationError unless `grid` is a permutation of [0, h*w).
  Arrangement(int h, int w, std::vector<int> grid);

  static Arrangement identity(int h, int w);

  int h() const noexcept { return h_; }
  int w() const noexcept { return w_; }
  int joint_count() const noexcept { return h_ * w_; }

  // Joint stored at (row, col).
  int at(int row, int col) const noexcept { return grid_[row * w_ + col]; }
  // Row-major cell index holding `joint`.
  int cell_of(int joint) const noexcept { return cells_[joint]; }

  const std::vector<int>& grid() const noexcept { return grid_; }

  friend bool operator==(const Arrangement& a, const Arrangement& b) {
    return a.h_ == b.h_ && a.w_ == b.w_ && a.grid_ == b.grid_;
  }

 private:
  int h_ = 0;
  int w_ = 0;
  std::vector<int> grid_;
  std::vector<int> cells_;
};

struct ArrangementSet {
  std::vector<Arrangement> members;
  double gamma = 0.0;
  double gamma_t = 0.0;
  std::uint64_t seed = 0;
  // Rejection-sampling draws consumed, including the accepted one.
  std::uint64_t attempts = 0;

  int h() const { return members.at(0).h(); }
  int w() const { return members.at(0).w(); }
  int m() const noexcept { return static_cast<int>(members.size()); }

  // Members share (h, w); gamma equals set_metric(members); gamma > gamma_t.
  void validate() const;

  // Stable content identifier (hash of shape and member grids).
  std::string id() const;

  friend bool operator==(const ArrangementSet&, const ArrangementSet&) = default;
};

// Sum over members q != j of the Chebyshev distance between the cells of
// `joint` in members j and q.
long long radial_distance(int joint, std::size_t j, std::span<const Arrangement> members);

// Sum of radial_distance over every member and joint. Each unordered pair of
// members is counted from both ends.
double set_metric(std::span<const Arrangement> members);

// Factorization h * w = joint_count with h <= w and w - h minimal.
std::pair<int, int> grid_shape_for(int joint_count);

// Uniformly random arrangement drawn with a Fisher-Yates shuffle.
template <typename Urbg>
Arrangement random_arrangement(int h, int w, Urbg& rng);

struct GenerateOptions {
  int h = 5;
  int w = 5;
  int m = 36;
  // nullopt selects the automatic threshold.
  std::optional<double> gamma_t;
  std::uint64_t seed = 0;
  std::uint64_t max_attempts = 100000;
  unsigned workers = 1;
  // Random sets drawn to estimate the automatic threshold.
  int auto_samples = 1000;
  double auto_percentile = 0.9;
};

// Raised when no candidate beats the threshold within max_attempts.
class GenerationError : public Error {
 public:
  GenerationError(const std::string& what, double best_gamma, double gamma_t)
      : Error(what), best_gamma_(best_gamma), gamma_t_(gamma_t) {}
  double best_gamma() const noexcept { return best_gamma_; }
  double gamma_t() const noexcept { return gamma_t_; }

 private:
  double best_gamma_;
  double gamma_t_;
};

// Nearest-rank percentile of set_metric over `samples` seeded random m-sets.
double auto_threshold(int h, int w, int m, std::uint64_t seed, int samples = 1000,
                      double percentile = 0.9);

// Draws m random arrangements per attempt until set_metric > gamma_t.
// Attempt a uses a stream derived from (seed, a), and the lowest accepted
// attempt index wins, so the result does not depend on opts.workers.
ArrangementSet generate_set(const GenerateOptions& opts);

struct BruteForceResult {
  double best_gamma = 0.0;
  std::vector<Arrangement> witness;
  std::uint64_t candidates = 0;
};

inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;

// Exact maximum of set_metric over all m-subsets of distinct arrangements.
// Refuses (ValidationError) when more than kBruteForceLimit subsets exist.
BruteForceResult brute_force_best(int h, int w, int m);

std::string to_json(const ArrangementSet& set);
// Parses and validates a set file.
ArrangementSet arrangement_set_from_json(std::string_view text);

// ---------------------------------------------------------------------------

template <typename Urbg>
Arrangement random_arrangement(int h, int w, Urbg& rng) {
  const int n = h * w;
  std::vector<int> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[i] = i;
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(grid[i], grid[pick(rng)]);
  }
  return Arrangement(h, w, std::move(grid));
}

}  // namespace skepxel
