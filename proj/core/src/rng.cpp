#include "stylefactor/rng.hpp"

#include <cstdio>
#include <sstream>

#include "stylefactor/error.hpp"

namespace stylefactor {

std::size_t Rng::UniformIndex(std::size_t n) {
  auto idx = static_cast<std::size_t>(Uniform() * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

double Rng::Gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

std::vector<double> Rng::Dirichlet(std::size_t dim, double concentration) {
  std::vector<double> out(dim, 0.0);
  if (dim == 1) {
    out[0] = 1.0;
    return out;
  }
  double total = 0.0;
  for (auto& v : out) {
    v = Gamma(concentration);
    total += v;
  }
  if (!(total > 0.0)) {
    // Every component underflowed (tiny concentrations); the limit of the
    // Dirichlet as concentration -> 0 is a uniformly chosen vertex.
    out[UniformIndex(dim)] = 1.0;
    return out;
  }
  for (auto& v : out) v /= total;
  return out;
}

std::size_t Rng::Categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = Uniform() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return k;
  }
  return weights.size() - 1;
}

std::string Rng::Serialize() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

Rng Rng::Deserialize(std::string_view state) {
  Rng rng;
  std::istringstream is{std::string(state)};
  is >> rng.engine_;
  if (is.fail()) throw Error(ErrorKind::kSchema, "malformed rng state");
  return rng;
}

std::uint64_t MixSeed(std::uint64_t value) {
  std::uint64_t z = value + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t Fnv1a64(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace stylefactor
