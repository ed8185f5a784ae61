#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace flownorm::rng {

// Every simulation draws from its own stream derived from (master_seed,
// stream_index) through a SplitMix64 finalizer hash. Streams are therefore
// independent of scheduling: simulation i produces the same draws whether
// it runs first, last, or on any worker thread.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream_index);

using Engine = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of one engine output.
// Used instead of std::uniform_real_distribution, whose output sequence
// is not pinned by the standard.
double next_unit(Engine& eng);

// Uniform double in [a, b).
double next_uniform(Engine& eng, double a, double b);

// Fills `out` with N(mean, sd) deviates via Box-Muller, consuming engine
// outputs in a fixed order (two uniforms per pair of deviates; an odd-length
// fill still consumes the full final pair). sd == 0 yields exact zeros
// offset by mean.
void fill_gaussian(Engine& eng, std::span<double> out, double mean, double sd);

// Fills `out` with uniforms on [a, b), one engine output per element.
void fill_uniform(Engine& eng, std::span<double> out, double a, double b);

}  // namespace flownorm::rng
