#pragma once

// Deterministic random streams.
//
// Every random decision in the library draws from a RandomStream keyed by
// (seed, purpose tag, indices). Work items own their stream, so results do
// not depend on thread count or iteration order.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace coda {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

// Mixes a seed, a tag and up to two indices into one 64-bit stream key.
std::uint64_t derive_stream_key(std::uint64_t seed, std::string_view tag,
                                std::uint64_t a = 0, std::uint64_t b = 0) noexcept;

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : engine_(key) {}
  RandomStream(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0,
               std::uint64_t b = 0)
      : engine_(derive_stream_key(seed, tag, a, b)) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  std::uint64_t binomial(std::uint64_t trials, double p);
  // Index drawn with probability proportional to weights.
  std::size_t categorical(std::span<const double> weights);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace coda
