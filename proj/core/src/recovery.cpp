#include "stylefactor/recovery.hpp"

#include <cmath>
#include <limits>

#include "stylefactor/distance.hpp"
#include "stylefactor/error.hpp"

namespace stylefactor {
namespace {

std::vector<int> GreedyAssign(const Matrix& cost) {
  const std::size_t nl = cost.rows();
  const std::size_t np = cost.cols();
  std::vector<int> match(nl, -1);
  std::vector<bool> used(np, false);
  for (std::size_t round = 0; round < std::min(nl, np); ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bl = 0;
    std::size_t bp = 0;
    for (std::size_t l = 0; l < nl; ++l) {
      if (match[l] >= 0) continue;
      for (std::size_t p = 0; p < np; ++p) {
        if (used[p]) continue;
        if (cost(l, p) < best) {
          best = cost(l, p);
          bl = l;
          bp = p;
        }
      }
    }
    match[bl] = static_cast<int>(bp);
    used[bp] = true;
  }
  return match;
}

}  // namespace

double Overlap(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorKind::kInvalidArgument, "overlap of unequal-length vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::min(p[i], q[i]);
  return s;
}

TopicMatching GreedyMatchTopics(const std::vector<Matrix>& learned, const std::vector<Matrix>& planted) {
  if (learned.size() != planted.size() || learned.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "topic matching needs the same regions on both sides");
  }
  const std::size_t nl = learned.front().rows();
  const std::size_t np = planted.front().rows();
  Matrix cost(nl, np);
  for (std::size_t r = 0; r < learned.size(); ++r) {
    for (std::size_t l = 0; l < nl; ++l) {
      for (std::size_t p = 0; p < np; ++p) {
        cost(l, p) += TotalVariationDistance(learned[r].row(l), planted[r].row(p)) /
                      static_cast<double>(learned.size());
      }
    }
  }
  TopicMatching out;
  out.learned_to_planted = GreedyAssign(cost);
  out.cost.assign(nl, std::numeric_limits<double>::quiet_NaN());
  std::size_t matched = 0;
  for (std::size_t l = 0; l < nl; ++l) {
    if (out.learned_to_planted[l] < 0) continue;
    out.cost[l] = cost(l, static_cast<std::size_t>(out.learned_to_planted[l]));
    out.mean_cost += out.cost[l];
    ++matched;
  }
  if (matched > 0) out.mean_cost /= static_cast<double>(matched);
  return out;
}

double RegionAlignmentRate(const std::vector<Matrix>& learned, const std::vector<Matrix>& planted) {
  if (learned.size() != planted.size() || learned.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "alignment needs the same regions on both sides");
  }
  const std::size_t nl = learned.front().rows();
  std::vector<std::vector<int>> per_region;
  for (std::size_t r = 0; r < learned.size(); ++r) {
    per_region.push_back(GreedyMatchTopics({learned[r]}, {planted[r]}).learned_to_planted);
  }
  std::size_t aligned = 0;
  for (std::size_t k = 0; k < nl; ++k) {
    bool same = per_region.front()[k] >= 0;
    for (std::size_t r = 1; r < per_region.size() && same; ++r) same = per_region[r][k] == per_region.front()[k];
    aligned += same;
  }
  return static_cast<double>(aligned) / static_cast<double>(nl);
}

Corpus ProjectToRegion(const Corpus& corpus, std::size_t region) {
  if (region >= corpus.num_regions()) throw Error(ErrorKind::kOutOfRange, "region index out of range");
  Corpus out;
  out.regions = {corpus.regions[region]};
  out.vocabularies = {corpus.vocabularies[region]};
  for (const auto& doc : corpus.documents) {
    if (doc.tokens_by_region[region].empty()) continue;
    out.documents.push_back({doc.id, {doc.tokens_by_region[region]}, doc.image_url});
    if (auto it = corpus.labels.find(doc.id); it != corpus.labels.end()) out.labels.insert(*it);
  }
  return out;
}

}  // namespace stylefactor
