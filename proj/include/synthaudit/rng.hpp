#pragma once

#include <cstdint>
#include <random>

namespace synthaudit {

// Portable seeded generator. std::mt19937_64 output is fully specified, but
// the standard distributions are not, so bounded integers and normals are
// derived here to keep results identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1).
  double unit();

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace synthaudit
