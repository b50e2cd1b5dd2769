#include "hdlda/rng.hpp"

#include <cmath>

#include "hdlda/error.hpp"

namespace hdlda {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  return mix64(state);
}

RngStream rng_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  // Two rounds of mixing so that nearby (seed, id) pairs share no structure.
  const std::uint64_t key = mix64(mix64(master_seed) ^ mix64(stream_id + 0xD1B54A32D192ED03ULL));
  std::uint64_t sm = key;
  std::array<std::uint64_t, 4> state{};
  for (auto& word : state) word = splitmix64(sm);
  RngStream out(state);
  out.seed_word_ = key;
  return out;
}

std::uint64_t RngStream::next_u64() {
  auto& s = state_;
  const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
  const std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::InvalidArgument, "uniform_index: bound must be positive");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

double RngStream::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  return u * f;
}

Vec mvn_sample(RngStream& rng, const Vec& mean, const Mat& chol) {
  if (chol.rows() != mean.size() || chol.cols() != mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mvn_sample: mean and factor sizes differ");
  }
  Vec z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + chol.triangularView<Eigen::Lower>() * z;
}

}  // namespace hdlda
