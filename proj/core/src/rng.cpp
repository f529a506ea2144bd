#include "losscap/rng.hpp"

#include <cmath>

#include "losscap/errors.hpp"

namespace losscap {

namespace {

constexpr std::uint64_t k_mul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t k_mul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t k_weyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t k_weyl1 = 0xBB67AE8584CAA73BULL;

// Key salt: fixed second key word so that the whole key space is a function
// of the user seed alone.
constexpr std::uint64_t k_key_salt = 0x1905EE4DB9F012E7ULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  lo = static_cast<std::uint64_t>(p);
  hi = static_cast<std::uint64_t>(p >> 64);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key) {
  std::array<std::uint64_t, 4> c = counter;
  std::uint64_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    if (round != 0) {
      k0 += k_weyl0;
      k1 += k_weyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(k_mul0, c[0], hi0, lo0);
    mulhilo(k_mul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
  }
  return c;
}

Rng::Rng(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2, std::uint64_t s3)
    : key_{seed, k_key_salt}, base_{0, s1, s2, s3} {}

Rng::Rng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t s2, std::uint64_t s3)
    : Rng(seed, static_cast<std::uint64_t>(purpose), s2, s3) {}

void Rng::refill() {
  std::array<std::uint64_t, 4> ctr = base_;
  ctr[0] = block_++;
  buf_ = philox4x64(ctr, key_);
  pos_ = 0;
}

std::uint64_t Rng::next_u64() {
  if (pos_ == 4) refill();
  return buf_[pos_++];
}

std::uint64_t Rng::below(std::uint64_t bound) {
  unsigned __int128 p = static_cast<unsigned __int128>(next_u64()) * bound;
  return static_cast<std::uint64_t>(p >> 64);
}

double Rng::uniform() {
  // 53 random mantissa bits -> [0, 1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  // midpoints of the 2^53 grid -> strictly inside (0, 1)
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform_pos();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(6.283185307179586476925287 * u2);
}

double Rng::exponential() { return -std::log(uniform_pos()); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw ValidationError("gamma: shape must be positive");
  if (shape < 1.0) {
    // boost to shape+1, then scale back by U^{1/shape}
    double g = gamma(shape + 1.0);
    return g * std::pow(uniform_pos(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  double ga = gamma(a);
  double gb = gamma(b);
  return ga / (ga + gb);
}

}  // namespace losscap
