#include "stylefactor/distance.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "stylefactor/error.hpp"

namespace stylefactor {
namespace {

void RequireSameSize(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorKind::kInvalidArgument, "distance between vectors of unequal length");
}

// Sums per-coordinate terms in ascending order, so every distance is a
// bit-exact symmetric function of the coordinate pairs and relabeling topics
// cannot reshuffle tied rankings.
template <typename Term>
double SortedSum(std::size_t n, Term term) {
  thread_local std::vector<double> terms;
  terms.resize(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = term(i);
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace

SimplexMetric ParseSimplexMetric(std::string_view name) {
  if (name == "hellinger") return SimplexMetric::kHellinger;
  if (name == "total-variation" || name == "tv") return SimplexMetric::kTotalVariation;
  if (name == "jensen-shannon" || name == "js") return SimplexMetric::kJensenShannon;
  if (name == "euclidean") return SimplexMetric::kEuclidean;
  throw Error(ErrorKind::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

std::string_view SimplexMetricName(SimplexMetric metric) {
  switch (metric) {
    case SimplexMetric::kHellinger: return "hellinger";
    case SimplexMetric::kTotalVariation: return "total-variation";
    case SimplexMetric::kJensenShannon: return "jensen-shannon";
    case SimplexMetric::kEuclidean: return "euclidean";
  }
  return "hellinger";
}

const std::vector<SimplexMetric>& AllSimplexMetrics() {
  static const std::vector<SimplexMetric> all = {SimplexMetric::kHellinger, SimplexMetric::kTotalVariation,
                                                 SimplexMetric::kJensenShannon, SimplexMetric::kEuclidean};
  return all;
}

// Both of the next two use the overlap form. Against a basis vector e_k it
// reduces to a function of p_k alone, so ranking by distance to e_k and by
// p_k agree exactly rather than up to rounding of the other coordinates.
double HellingerDistance(std::span<const double> p, std::span<const double> q) {
  RequireSameSize(p, q);
  const double bc = SortedSum(p.size(), [&](std::size_t i) { return std::sqrt(p[i] * q[i]); });
  return std::sqrt(std::max(0.0, 1.0 - bc));
}

double TotalVariationDistance(std::span<const double> p, std::span<const double> q) {
  RequireSameSize(p, q);
  const double overlap = SortedSum(p.size(), [&](std::size_t i) { return std::min(p[i], q[i]); });
  return std::max(0.0, 1.0 - overlap);
}

double JensenShannonDistance(std::span<const double> p, std::span<const double> q) {
  RequireSameSize(p, q);
  const double js = SortedSum(p.size(), [&](std::size_t i) {
    const double m = 0.5 * (p[i] + q[i]);
    double t = 0.0;
    if (p[i] > 0.0) t += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) t += 0.5 * q[i] * std::log2(q[i] / m);
    return t;
  });
  return std::sqrt(std::max(0.0, js));
}

double EuclideanDistance(std::span<const double> p, std::span<const double> q) {
  RequireSameSize(p, q);
  return std::sqrt(SortedSum(p.size(), [&](std::size_t i) { return (p[i] - q[i]) * (p[i] - q[i]); }));
}

double Distance(SimplexMetric metric, std::span<const double> p, std::span<const double> q) {
  switch (metric) {
    case SimplexMetric::kHellinger: return HellingerDistance(p, q);
    case SimplexMetric::kTotalVariation: return TotalVariationDistance(p, q);
    case SimplexMetric::kJensenShannon: return JensenShannonDistance(p, q);
    case SimplexMetric::kEuclidean: return EuclideanDistance(p, q);
  }
  return HellingerDistance(p, q);
}

void RequireOnSimplex(std::span<const double> v, double tol) {
  if (v.empty()) throw Error(ErrorKind::kInvalidArgument, "empty mixture vector");
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorKind::kInvalidArgument, "mixture entries must be finite and non-negative");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > tol) throw Error(ErrorKind::kInvalidArgument, "mixture does not sum to 1");
}

}  // namespace stylefactor
