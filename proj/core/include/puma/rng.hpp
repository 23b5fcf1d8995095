#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace puma {

/// splitmix64 generator. Pinned here (constants and all derived draws) so that
/// shuffles and synthetic data are reproducible across builds and platforms;
/// std::shuffle and the <random> distributions are implementation-defined and
/// must not be used where byte-stable output is required.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound). Plain modulo draw; the bias is < 2^-50 for
  /// any bound below 2^14 and irrelevant at the manifest sizes seen here.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. One draw consumes two unit() values; the
  /// second variate is discarded to keep the stream position predictable.
  double gaussian() {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

private:
  std::uint64_t state_;
};

/// Fisher-Yates shuffle (Durstenfeld order: i from n-1 down to 1, swap with
/// rng.below(i + 1)).
template <typename T>
void fisher_yates_shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace puma
