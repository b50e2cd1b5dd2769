#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "hdlda/linalg.hpp"

namespace hdlda {

/// Seedable xoshiro256** stream with a polar-method normal generator.
///
/// A stream is a plain value: copying it forks an identical sequence, and
/// every draw advances only the instance it is called on. Output depends on
/// nothing but the 256-bit state, so sequences are identical across
/// platforms and thread schedules.
class RngStream {
 public:
  explicit RngStream(std::array<std::uint64_t, 4> state) : state_(state) {}

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound); bound > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal variate (Marsaglia polar method; the second variate of
  /// each accepted pair is cached).
  double normal();

  /// The key this stream was derived from, recorded in experiment output.
  std::uint64_t seed_word() const { return seed_word_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  friend RngStream rng_stream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::array<std::uint64_t, 4> state_;
  std::optional<double> spare_;
  std::uint64_t seed_word_ = 0;
};

/// Mixes (master_seed, stream_id) with splitmix64 into an independent stream.
RngStream rng_stream(std::uint64_t master_seed, std::uint64_t stream_id);

std::uint64_t splitmix64(std::uint64_t& state);

/// mean + chol · z with z i.i.d. standard normal.
Vec mvn_sample(RngStream& rng, const Vec& mean, const Mat& chol);

/// Fisher-Yates shuffle driven by the stream (std::shuffle is not portable
/// across standard libraries).
template <class RandomIt>
void shuffle(RandomIt first, RandomIt last, RngStream& rng) {
  const auto n = last - first;
  for (auto i = n - 1; i > 0; --i) {
    const auto j = static_cast<decltype(i)>(rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    using std::swap;
    swap(first[i], first[j]);
  }
}

}  // namespace hdlda
