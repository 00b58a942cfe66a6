#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace survitr {

// Seeded random generator with hand-rolled transforms so that output streams
// are bit-reproducible across platforms and standard library versions.
// Independent streams for replication workers are derived from one master
// seed via splitmix64 mixing.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  // Derive an independent child stream from (master, stream_id).
  static Rng stream(std::uint64_t master, std::uint64_t stream_id) {
    return Rng(mix(master + 0x9e3779b97f4a7c15ULL * (stream_id + 1)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1], safe as a log argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double normal(double mean = 0.0, double sd = 1.0) {
    // Box-Muller, two fresh uniforms per draw.
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double theta = 2.0 * M_PI * uniform();
    return mean + sd * r * std::cos(theta);
  }

  double exponential() { return -std::log(uniform_pos()); }

  // Survival exp(-(t/scale)^shape).
  double weibull(double scale, double shape) {
    return scale * std::pow(exponential(), 1.0 / shape);
  }

  double lognormal(double mu, double sd) { return std::exp(normal(mu, sd)); }

  int sign() { return uniform() < 0.5 ? 1 : -1; }

  // Uniform integer on [0, n).
  int uniform_index(int n) {
    return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace survitr
