#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace saekit {

// xoshiro256** seeded through splitmix64. The algorithm is fixed so that a
// seed produces the same stream on every platform and compiler.
//
// Derived draws:
//   uniform()   = (next() >> 11) * 2^-53                  in [0, 1)
//   index(n)    = next() % n, rejecting next() < (2^64 - n) % n
//   normal()    = Box-Muller on (1 - uniform(), uniform()), cosine branch only
//   shuffle()   = Fisher-Yates from the back using index(i + 1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  std::uint64_t index(std::uint64_t n) noexcept;

  template <class T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Per-task seed fan-out: root XOR task index.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
  return root ^ index;
}

}  // namespace saekit
