#include "skepxel/arrangement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include <json.hpp>

#include "skepxel/parallel.hpp"
#include "skepxel/random.hpp"

namespace skepxel {

using nlohmann::json;

Arrangement::Arrangement(int h, int w, std::vector<int> grid)
    : h_(h), w_(w), grid_(std::move(grid)) {
  if (h < 1 || w < 1) throw ValidationError("arrangement dimensions must be positive");
  const auto n = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  if (grid_.size() != n) {
    throw ValidationError("arrangement grid has " + std::to_string(grid_.size()) +
                          " cells, expected " + std::to_string(n));
  }
  cells_.assign(n, -1);
  for (std::size_t cell = 0; cell < n; ++cell) {
    const int joint = grid_[cell];
    if (joint < 0 || static_cast<std::size_t>(joint) >= n || cells_[joint] != -1) {
      throw ValidationError("arrangement grid is not a permutation of [0, " +
                            std::to_string(n) + ")");
    }
    cells_[joint] = static_cast<int>(cell);
  }
}

Arrangement Arrangement::identity(int h, int w) {
  std::vector<int> grid(static_cast<std::size_t>(h * w));
  for (int i = 0; i < h * w; ++i) grid[i] = i;
  return Arrangement(h, w, std::move(grid));
}

namespace {

void check_shapes(std::span<const Arrangement> members) {
  if (members.empty()) throw ValidationError("arrangement set is empty");
  for (const auto& a : members) {
    if (a.h() != members[0].h() || a.w() != members[0].w()) {
      throw ValidationError("arrangement set members have inconsistent dimensions");
    }
  }
}

int chebyshev(int cell_a, int cell_b, int w) noexcept {
  return std::max(std::abs(cell_a / w - cell_b / w), std::abs(cell_a % w - cell_b % w));
}

// Flattened per-member cell coordinates for the pairwise sum.
long long pairwise_metric(std::span<const Arrangement> members) {
  const int w = members[0].w();
  const int joints = members[0].joint_count();
  const std::size_t m = members.size();
  std::vector<int> rows(m * joints);
  std::vector<int> cols(m * joints);
  for (std::size_t j = 0; j < m; ++j) {
    for (int i = 0; i < joints; ++i) {
      const int cell = members[j].cell_of(i);
      rows[j * joints + i] = cell / w;
      cols[j * joints + i] = cell % w;
    }
  }
  long long total = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const int* rj = &rows[j * joints];
    const int* cj = &cols[j * joints];
    for (std::size_t q = j + 1; q < m; ++q) {
      const int* rq = &rows[q * joints];
      const int* cq = &cols[q * joints];
      long long pair = 0;
      for (int i = 0; i < joints; ++i) {
        pair += std::max(std::abs(rj[i] - rq[i]), std::abs(cj[i] - cq[i]));
      }
      total += pair;
    }
  }
  return 2 * total;
}

std::vector<Arrangement> draw_members(int h, int w, int m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Arrangement> members;
  members.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) members.push_back(random_arrangement(h, w, rng));
  return members;
}

constexpr std::uint64_t kStreamAttempt = 0x61747470u;  // "attp"
constexpr std::uint64_t kStreamAuto = 0x6175746fu;     // "auto"

}  // namespace

long long radial_distance(int joint, std::size_t j, std::span<const Arrangement> members) {
  check_shapes(members);
  if (j >= members.size()) throw ValidationError("member index out of range");
  if (joint < 0 || joint >= members[0].joint_count()) {
    throw ValidationError("joint index out of range");
  }
  const int w = members[0].w();
  const int here = members[j].cell_of(joint);
  long long sum = 0;
  for (std::size_t q = 0; q < members.size(); ++q) {
    if (q == j) continue;
    sum += chebyshev(here, members[q].cell_of(joint), w);
  }
  return sum;
}

double set_metric(std::span<const Arrangement> members) {
  check_shapes(members);
  return static_cast<double>(pairwise_metric(members));
}

std::pair<int, int> grid_shape_for(int joint_count) {
  if (joint_count < 1) throw ValidationError("joint count must be positive");
  int h = static_cast<int>(std::sqrt(static_cast<double>(joint_count)));
  while (h * h > joint_count) --h;
  while ((h + 1) * (h + 1) <= joint_count) ++h;
  for (; h >= 1; --h) {
    if (joint_count % h == 0) return {h, joint_count / h};
  }
  return {1, joint_count};
}

void ArrangementSet::validate() const {
  check_shapes(members);
  const double recomputed = set_metric(members);
  if (recomputed != gamma) {
    throw ValidationError("arrangement set gamma " + std::to_string(gamma) +
                          " does not match recomputed metric " +
                          std::to_string(recomputed));
  }
  if (!(gamma > gamma_t)) {
    throw ValidationError("arrangement set gamma " + std::to_string(gamma) +
                          " does not exceed threshold " + std::to_string(gamma_t));
  }
}

std::string ArrangementSet::id() const {
  // FNV-1a over shape and grids.
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (v >> (8 * b)) & 0xffu;
      hash *= 0x100000001b3ULL;
    }
  };
  feed(static_cast<std::uint64_t>(members.empty() ? 0 : h()));
  feed(static_cast<std::uint64_t>(members.empty() ? 0 : w()));
  feed(members.size());
  for (const auto& a : members) {
    for (int v : a.grid()) feed(static_cast<std::uint64_t>(v));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

double auto_threshold(int h, int w, int m, std::uint64_t seed, int samples,
                      double percentile) {
  if (samples < 1) throw ValidationError("auto threshold needs at least one sample");
  if (!(percentile > 0.0 && percentile <= 1.0)) {
    throw ValidationError("percentile must lie in (0, 1]");
  }
  std::vector<double> values(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    const auto members = draw_members(h, w, m, derive_seed(seed, kStreamAuto, s));
    values[s] = static_cast<double>(pairwise_metric(members));
  }
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(percentile * samples));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

ArrangementSet generate_set(const GenerateOptions& opts) {
  if (opts.h < 1 || opts.w < 1) throw ValidationError("h and w must be positive");
  if (opts.m < 1) throw ValidationError("m must be >= 1");
  if (opts.max_attempts < 1) throw ValidationError("max_attempts must be >= 1");

  const double threshold =
      opts.gamma_t ? *opts.gamma_t
                   : auto_threshold(opts.h, opts.w, opts.m, opts.seed, opts.auto_samples,
                                    opts.auto_percentile);

  const unsigned workers = std::max(1u, opts.workers);
  const std::uint64_t batch = workers == 1 ? 1 : 4ull * workers;
  double best = -std::numeric_limits<double>::infinity();

  for (std::uint64_t base = 0; base < opts.max_attempts; base += batch) {
    const std::uint64_t count = std::min(batch, opts.max_attempts - base);
    std::vector<double> gammas(count);
    parallel_for(count, workers, [&](std::size_t k) {
      const auto members =
          draw_members(opts.h, opts.w, opts.m, derive_seed(opts.seed, kStreamAttempt, base + k));
      gammas[k] = static_cast<double>(pairwise_metric(members));
    });
    for (std::uint64_t k = 0; k < count; ++k) {
      best = std::max(best, gammas[k]);
      if (gammas[k] > threshold) {
        ArrangementSet set;
        set.members = draw_members(opts.h, opts.w, opts.m,
                                   derive_seed(opts.seed, kStreamAttempt, base + k));
        set.gamma = gammas[k];
        set.gamma_t = threshold;
        set.seed = opts.seed;
        set.attempts = base + k + 1;
        return set;
      }
    }
  }
  char msg[256];
  std::snprintf(msg, sizeof(msg),
                "no arrangement set exceeded gamma_t = %.17g within %llu attempts; "
                "best gamma found = %.17g",
                threshold, static_cast<unsigned long long>(opts.max_attempts), best);
  throw GenerationError(msg, best, threshold);
}

BruteForceResult brute_force_best(int h, int w, int m) {
  if (h < 1 || w < 1 || m < 1) throw ValidationError("h, w and m must be positive");
  const int joints = h * w;

  // Number of arrangements (joints!) and subsets C(joints!, m), both guarded.
  std::uint64_t perms = 1;
  for (int k = 2; k <= joints; ++k) {
    perms *= static_cast<std::uint64_t>(k);
    if (perms > kBruteForceLimit) {
      throw ValidationError("brute force refused: more than " +
                            std::to_string(kBruteForceLimit) + " arrangements");
    }
  }
  if (static_cast<std::uint64_t>(m) > perms) {
    throw ValidationError("m exceeds the number of distinct arrangements");
  }
  // C(perms, m), built incrementally; every partial product is exact.
  unsigned __int128 subsets = 1;
  for (int k = 0; k < m && subsets <= kBruteForceLimit; ++k) {
    subsets = subsets * (perms - static_cast<std::uint64_t>(k)) /
              static_cast<std::uint64_t>(k + 1);
  }
  if (subsets > kBruteForceLimit) {
    throw ValidationError("brute force refused: more than " +
                          std::to_string(kBruteForceLimit) + " candidate sets");
  }

  std::vector<Arrangement> all;
  all.reserve(perms);
  std::vector<int> grid(static_cast<std::size_t>(joints));
  for (int i = 0; i < joints; ++i) grid[i] = i;
  do {
    all.emplace_back(h, w, grid);
  } while (std::next_permutation(grid.begin(), grid.end()));

  BruteForceResult result;
  result.best_gamma = -1.0;
  std::vector<std::size_t> pick(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) pick[k] = static_cast<std::size_t>(k);
  std::vector<Arrangement> current(static_cast<std::size_t>(m));
  const std::size_t n = all.size();
  for (;;) {
    for (int k = 0; k < m; ++k) current[k] = all[pick[k]];
    const double g = static_cast<double>(pairwise_metric(current));
    ++result.candidates;
    if (g > result.best_gamma) {
      result.best_gamma = g;
      result.witness = current;
    }
    // Next m-combination in lexicographic order.
    int k = m - 1;
    while (k >= 0 && pick[k] == n - static_cast<std::size_t>(m - k)) --k;
    if (k < 0) break;
    ++pick[k];
    for (int r = k + 1; r < m; ++r) pick[r] = pick[r - 1] + 1;
  }
  return result;
}

std::string to_json(const ArrangementSet& set) {
  json doc;
  doc["h"] = set.members.empty() ? 0 : set.h();
  doc["w"] = set.members.empty() ? 0 : set.w();
  doc["m"] = set.m();
  doc["gamma"] = set.gamma;
  doc["gamma_t"] = set.gamma_t;
  doc["seed"] = set.seed;
  doc["attempts"] = set.attempts;
  json members = json::array();
  for (const auto& a : set.members) members.push_back(a.grid());
  doc["members"] = std::move(members);
  return doc.dump();
}

ArrangementSet arrangement_set_from_json(std::string_view text) {
  ArrangementSet set;
  try {
    const json doc = json::parse(text);
    const int h = doc.at("h").get<int>();
    const int w = doc.at("w").get<int>();
    const int m = doc.at("m").get<int>();
    set.gamma = doc.at("gamma").get<double>();
    set.gamma_t = doc.at("gamma_t").get<double>();
    set.seed = doc.at("seed").get<std::uint64_t>();
    set.attempts = doc.value("attempts", std::uint64_t{0});
    for (const auto& g : doc.at("members")) {
      set.members.emplace_back(h, w, g.get<std::vector<int>>());
    }
    if (set.m() != m) {
      throw ValidationError("arrangement set declares m = " + std::to_string(m) +
                            " but lists " + std::to_string(set.m()) + " members");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed arrangement set: ") + e.what());
  }
  set.validate();
  return set;
}

}  // namespace skepxel
