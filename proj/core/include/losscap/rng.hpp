#pragma once

// Counter-based random number generation (Philox4x64-10) with keyed
// substreams.
//
// A logical stream is addressed by (seed, s1, s2, s3); draw i of that stream
// reads the Philox block with counter (i, s1, s2, s3) under key
// (seed, salt). Philox is a bijection of the counter space, so streams with
// distinct labels never overlap and results are independent of execution
// order — replicate m of year y can be simulated on any thread at any time
// and always sees the same numbers.

#include <array>
#include <cstdint>

namespace losscap {

// One Philox4x64-10 block. Matches the reference algorithm (and
// numpy.random.Philox, which applies it to a pre-incremented counter).
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key);

// Stream labels for the first counter word after the draw index. Keeping the
// pipeline stages on disjoint labels means no two stages can ever consume the
// same block, whatever (replicate, year) pair they are working on.
enum class StreamPurpose : std::uint64_t {
  standard_sim = 1,
  direct_inversion = 2,
  sir_proposal = 3,
  sir_resample = 4,
  toy_generation = 5,
  bootstrap = 6,
  perturbation_coin = 7,
  width_bootstrap = 8,
  mc_band = 9,
  testing = 99,
};

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2 = 0, std::uint64_t s3 = 0);
  Rng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t s2 = 0, std::uint64_t s3 = 0);

  std::uint64_t next_u64();
  // Uniform integer on [0, bound), bound >= 1. Multiply-shift mapping; the
  // bias is bound/2^64 and irrelevant at the bounds used here.
  std::uint64_t below(std::uint64_t bound);

  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1), safe under log()
  double normal();       // standard normal, Box-Muller
  double exponential();  // rate 1
  double gamma(double shape);          // unit scale, shape > 0 (Marsaglia-Tsang)
  double beta(double a, double b);     // two-gamma construction

 private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> base_;   // (draw index placeholder, s1, s2, s3)
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buf_{};
  int pos_ = 4;  // forces refill on first draw
};

}  // namespace losscap
