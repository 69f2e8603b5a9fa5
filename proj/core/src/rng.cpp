#include "clsm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace clsm {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace

Rng::Rng(std::uint64_t seed) { key_ = mix64(seed + kGolden); }

Rng Rng::stream(std::uint64_t tag, std::uint64_t id) const {
  Rng child(0);
  child.key_ = mix64(key_ ^ mix64(tag * kGolden + 1) ^ mix64(id + 2 * kGolden));
  child.counter_ = 0;
  return child;
}

std::uint64_t Rng::next_u64() {
  counter_ += 1;
  return mix64(key_ + counter_ * kGolden);
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_double_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

bool Rng::next_bernoulli(double p) { return next_double() < p; }

double Rng::next_gaussian() {
  // Polar method; draws pairs until one lands inside the unit disk.
  while (true) {
    const double u = 2.0 * next_double() - 1.0;
    const double v = 2.0 * next_double() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double Rng::next_gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::domain_error("next_gamma: shape must be positive");
  }
  if (shape < 1.0) {
    // Boost the shape and correct with a power of a uniform.
    return next_gamma(shape + 1.0) * std::pow(next_double_open(), 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      x = next_gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_double_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::uint32_t Rng::next_poisson(double mean) {
  if (mean < 0.0) throw std::domain_error("next_poisson: mean must be nonnegative");
  if (mean == 0.0) return 0;
  if (mean > 30.0) {
    // Poisson(m) equals the sum of two independent Poisson(m/2) draws.
    return next_poisson(mean * 0.5) + next_poisson(mean * 0.5);
  }
  const double limit = std::exp(-mean);
  std::uint32_t k = 0;
  double prod = next_double_open();
  while (prod > limit) {
    ++k;
    prod *= next_double_open();
  }
  return k;
}

std::uint32_t Rng::next_categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = next_double() * total;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return static_cast<std::uint32_t>(i);
  }
  return static_cast<std::uint32_t>(weights.size() - 1);
}

std::vector<double> Rng::next_dirichlet(std::span<const double> alpha) {
  std::vector<double> draw(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    draw[i] = next_gamma(alpha[i]);
    total += draw[i];
  }
  if (total <= 0.0) {
    // All gamma draws underflowed; only reachable with absurdly small alpha.
    const double uniform = 1.0 / static_cast<double>(alpha.size());
    for (double& v : draw) v = uniform;
    return draw;
  }
  for (double& v : draw) v /= total;
  return draw;
}

}  // namespace clsm
