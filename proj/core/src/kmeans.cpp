#include <algorithm>
#include <limits>
#include <set>

#include "stylefactor/error.hpp"
#include "stylefactor/eval.hpp"
#include "stylefactor/rng.hpp"

namespace stylefactor {
namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

Matrix PlusPlusInit(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centers(k, x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.UniformIndex(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], SquaredDistance(x.row(i), centers.row(c)));
    if (c + 1 == k) break;
    double total = 0.0;
    for (double v : d2) total += v;
    // D^2 sampling; when every point already coincides with a centre the
    // distinct-vector precondition was violated upstream.
    pick = total > 0.0 ? rng.Categorical(d2) : rng.UniformIndex(n);
  }
  return centers;
}

}  // namespace

KMeansResult KMeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t max_iters) {
  const std::size_t n = x.rows();
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "k-means needs k >= 1");
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "k-means on an empty set");
  std::set<std::vector<double>> distinct;
  for (std::size_t i = 0; i < n && distinct.size() <= k; ++i) distinct.emplace(x.row(i).begin(), x.row(i).end());
  if (distinct.size() < k) {
    throw Error(ErrorKind::kInvalidArgument, "k-means: k=" + std::to_string(k) + " exceeds the number of distinct vectors");
  }

  Rng rng(seed);
  KMeansResult out;
  out.centroids = PlusPlusInit(x, k, rng);
  out.assignments.assign(n, -1);
  std::vector<std::size_t> counts(k);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = SquaredDistance(x.row(i), out.centroids.row(c));
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (out.assignments[i] != best) {
        out.assignments[i] = best;
        changed = true;
      }
    }

    std::fill(counts.begin(), counts.end(), 0);
    for (int a : out.assignments) ++counts[static_cast<std::size_t>(a)];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      // Move the point farthest from its centre into the empty cluster.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(out.assignments[i])] <= 1) continue;
        const double d = SquaredDistance(x.row(i), out.centroids.row(static_cast<std::size_t>(out.assignments[i])));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[static_cast<std::size_t>(out.assignments[far])];
      out.assignments[far] = static_cast<int>(c);
      counts[c] = 1;
      changed = true;
    }

    Matrix next(k, x.cols());
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = next.row(static_cast<std::size_t>(out.assignments[i]));
      auto src = x.row(i);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (auto& v : next.row(c)) v /= static_cast<double>(counts[c]);
    }
    out.centroids = std::move(next);

    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sse += SquaredDistance(x.row(i), out.centroids.row(static_cast<std::size_t>(out.assignments[i])));
    }
    out.objective_history.push_back(sse);
    out.iterations = iter + 1;
    if (!changed) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace stylefactor
