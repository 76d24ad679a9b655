#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gaussperc {

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream `stream` of a run seeded with `seed`:
/// std::mt19937_64 seeded with splitmix64(splitmix64(seed) + stream).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

/// Fill `out` with standard normals drawn from the engine.
void fill_normal(std::mt19937_64& eng, double* out, std::size_t n);
std::vector<double> normals(std::uint64_t seed, std::uint64_t stream, std::size_t n);

}  // namespace gaussperc
