#include "gaussperc/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace gaussperc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(splitmix64(seed) + stream));
}

void fill_normal(std::mt19937_64& eng, double* out, std::size_t n) {
  // boost's ziggurat is specified independently of the standard library,
  // so streams are reproducible across toolchains
  boost::random::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = nd(eng);
}

std::vector<double> normals(std::uint64_t seed, std::uint64_t stream, std::size_t n) {
  auto eng = make_stream(seed, stream);
  std::vector<double> out(n);
  fill_normal(eng, out.data(), n);
  return out;
}

}  // namespace gaussperc
