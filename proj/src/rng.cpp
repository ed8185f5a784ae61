#include "flownorm/rng.hpp"

#include <cmath>
#include <numbers>

namespace flownorm::rng {

namespace {

// SplitMix64 finalizer: bijective avalanche mix of a 64-bit word.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
  // Two finalizer rounds decorrelate nearby (seed, index) pairs.
  return splitmix64(splitmix64(master_seed) ^ splitmix64(stream_index + 0x632be59bd9b4e019ULL));
}

double next_unit(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

double next_uniform(Engine& eng, double a, double b) {
  return a + next_unit(eng) * (b - a);
}

void fill_gaussian(Engine& eng, std::span<double> out, double mean, double sd) {
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < out.size(); i += 2) {
    // 1 - u1 lies in (0, 1], so the log argument never hits zero.
    const double u1 = next_unit(eng);
    const double u2 = next_unit(eng);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double theta = two_pi * u2;
    out[i] = mean + sd * (r * std::cos(theta));
    if (i + 1 < out.size()) out[i + 1] = mean + sd * (r * std::sin(theta));
  }
}

void fill_uniform(Engine& eng, std::span<double> out, double a, double b) {
  for (double& x : out) x = next_uniform(eng, a, b);
}

}  // namespace flownorm::rng
