// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace seismic {

// Thrown when a file or serialized blob does not match the expected layout.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// splitmix64 finalizer. Bijective on 64-bit values with full avalanche; used
// as the keyed hash behind every implicit random structure (sign matrices,
// cell mappings) so none of them is ever materialized.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Deterministic pseudo-random stream (splitmix64). Every randomized step in
// the project draws from this class rather than <random> distributions, whose
// algorithms are implementation-defined; this keeps outputs byte-identical
// across standard libraries for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Exponential with the given scale (mean). log1p keeps u == 0 exact.
  double next_exp(double scale) noexcept { return -scale * std::log1p(-next_unit()); }

  // Standard normal via Box-Muller.
  double next_normal() noexcept {
    double u1;
    do {
      u1 = next_unit();
    } while (u1 == 0.0);
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Uniform in [0, bound); unbiased by rejection. bound must be nonzero.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t state_;
};

// One scored document. Results order by descending score; equal scores break
// toward the lower (original) document id everywhere in the engine.
struct ScoredDoc {
  std::uint32_t id;
  double score;
  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

inline bool score_before(const ScoredDoc& a, const ScoredDoc& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

using TopKResult = std::vector<ScoredDoc>;

// Best min(k, candidates.size()) entries under score_before, fully ordered.
TopKResult select_top_k(std::vector<ScoredDoc> candidates, std::size_t k);

// Counters filled by retrieval paths; used for pruning reports.
struct RetrievalStats {
  std::uint64_t docs_evaluated = 0;    // distinct documents scored
  std::uint64_t postings_visited = 0;  // accumulator touches
  std::uint64_t coords_skipped = 0;    // query coordinates outside the index dim
};

}  // namespace seismic
