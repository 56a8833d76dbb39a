#include "saiplab/rng.hpp"

#include <cmath>
#include <numbers>

#include "saiplab/errors.hpp"

namespace saiplab {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& w : s_) w = splitmix64(sm);
}

Rng Rng::for_chain(std::uint64_t seed, int chain_index) {
  // One splitmix round keyed by the chain index decorrelates the streams.
  std::uint64_t sm = seed;
  std::uint64_t base = splitmix64(sm);
  std::uint64_t mix = base + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(chain_index) + 1);
  return Rng(mix);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller; u1 shifted into (0, 1] so the log is always finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

Eigen::VectorXd Rng::gaussian(int n, double mean, double std) {
  if (std < 0.0) throw ContractViolation("gaussian: std must be >= 0");
  if (n < 0) throw ContractViolation("gaussian: n must be >= 0");
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = mean + std * normal();
  return out;
}

Eigen::VectorXd Rng::standard_normal(int n) { return gaussian(n, 0.0, 1.0); }

int Rng::uniform_index(int n) {
  if (n <= 0) throw ContractViolation("uniform_index: n must be positive");
  return static_cast<int>(uniform01() * n) % n;
}

double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ContractViolation("dot: length mismatch");
  return a.dot(b);
}

}  // namespace saiplab
