#include "stylefactor/applications.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "stylefactor/error.hpp"

namespace stylefactor {
namespace {

struct Scored {
  std::size_t index;
  double score;
};

// Highest score first, ascending id on ties.
RankedResult TopN(const EmbeddedCollection& c, std::vector<Scored> scored, std::size_t n, std::string query) {
  const auto cmp = [&c](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return c[a.index].doc_id < c[b.index].doc_id;
  };
  const std::size_t take = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), cmp);
  RankedResult out;
  out.query = std::move(query);
  out.entries.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.entries.push_back({c[scored[i].index].doc_id, scored[i].score});
  return out;
}

void RequireTopic(std::size_t k, std::size_t num_topics) {
  if (k >= num_topics) {
    throw Error(ErrorKind::kOutOfRange,
                "style index " + std::to_string(k) + " out of range (K=" + std::to_string(num_topics) + ")");
  }
}

void RequireN(std::size_t n) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "n must be >= 1");
}

}  // namespace

MixQuery MixQuery::Create(std::vector<std::size_t> styles, std::size_t num_topics) {
  if (styles.empty()) throw Error(ErrorKind::kInvalidArgument, "mix query needs at least one style");
  for (std::size_t k : styles) RequireTopic(k, num_topics);
  std::sort(styles.begin(), styles.end());
  styles.erase(std::unique(styles.begin(), styles.end()), styles.end());
  MixQuery q;
  q.styles_ = std::move(styles);
  return q;
}

std::vector<std::string> RankedResult::Ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.id);
  return ids;
}

RankedResult Retrieve(const EmbeddedCollection& collection, std::span<const double> query_theta, std::size_t n,
                      SimplexMetric metric, const std::optional<std::string>& exclude_id) {
  RequireN(n);
  if (query_theta.size() != collection.num_topics()) {
    throw Error(ErrorKind::kInvalidArgument, "query theta has " + std::to_string(query_theta.size()) +
                                                 " entries, collection has K=" +
                                                 std::to_string(collection.num_topics()));
  }
  RequireOnSimplex(query_theta);
  std::vector<Scored> scored;
  scored.reserve(collection.size());
  for (std::size_t i = 0; i < collection.size(); ++i) {
    if (exclude_id && collection[i].doc_id == *exclude_id) continue;
    scored.push_back({i, 0.0 - Distance(metric, collection[i].theta, query_theta)});
  }
  return TopN(collection, std::move(scored), n, "retrieve:" + std::string(SimplexMetricName(metric)));
}

RankedResult RetrieveById(const EmbeddedCollection& collection, const std::string& query_id, std::size_t n,
                          SimplexMetric metric) {
  const auto* q = collection.Find(query_id);
  if (!q) throw Error(ErrorKind::kNotFound, "unknown document id '" + query_id + "'");
  auto out = Retrieve(collection, q->theta, n, metric, query_id);
  out.query += ":" + query_id;
  return out;
}

double MixRelevance(std::span<const double> theta, const MixQuery& query) {
  double best = theta[query.styles().front()];
  for (std::size_t k : query.styles()) best = std::min(best, theta[k]);
  return best;
}

RankedResult MixRetrieve(const EmbeddedCollection& collection, const MixQuery& query, std::size_t n) {
  RequireN(n);
  for (std::size_t k : query.styles()) RequireTopic(k, collection.num_topics());
  std::vector<Scored> scored;
  scored.reserve(collection.size());
  for (std::size_t i = 0; i < collection.size(); ++i) scored.push_back({i, MixRelevance(collection[i].theta, query)});
  std::string desc = "mix:";
  for (std::size_t k : query.styles()) desc += std::to_string(k) + (k == query.styles().back() ? "" : ",");
  return TopN(collection, std::move(scored), n, desc);
}

std::vector<RankedResult> Traverse(const EmbeddedCollection& collection, std::size_t src, std::size_t tgt,
                                   std::size_t steps, std::size_t n, SimplexMetric metric, bool distinct) {
  RequireN(n);
  RequireTopic(src, collection.num_topics());
  RequireTopic(tgt, collection.num_topics());
  if (src == tgt) throw Error(ErrorKind::kInvalidArgument, "traversal needs distinct source and target styles");
  if (steps < 2) throw Error(ErrorKind::kInvalidArgument, "traversal needs at least 2 steps");

  std::vector<RankedResult> out;
  std::set<std::size_t> used;
  const double span = static_cast<double>(steps - 1);
  for (std::size_t s = 0; s < steps; ++s) {
    // Both weights come from exact integer ratios so swapping src and tgt
    // reproduces the mirrored targets bit for bit.
    std::vector<double> target(collection.num_topics(), 0.0);
    target[src] = static_cast<double>(steps - 1 - s) / span;
    target[tgt] = static_cast<double>(s) / span;

    std::vector<Scored> scored;
    for (std::size_t i = 0; i < collection.size(); ++i) {
      if (distinct && used.contains(i)) continue;
      scored.push_back({i, 0.0 - Distance(metric, collection[i].theta, target)});
    }
    auto step = TopN(collection, std::move(scored), n,
                     "traverse:" + std::to_string(src) + "->" + std::to_string(tgt) + ":" +
                         std::to_string(s) + "/" + std::to_string(steps - 1));
    if (distinct) {
      for (const auto& e : step.entries) {
        used.insert(static_cast<std::size_t>(collection.Find(e.id) - collection.embeddings().data()));
      }
    }
    out.push_back(std::move(step));
  }
  return out;
}

StyleSummary Summarize(const EmbeddedCollection& collection, std::size_t top_m, std::size_t exemplars_per_style) {
  if (collection.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot summarize an empty collection");
  const std::size_t K = collection.num_topics();
  StyleSummary s;
  s.influence.assign(K, 0.0);
  for (const auto& e : collection.embeddings()) {
    for (std::size_t k = 0; k < K; ++k) s.influence[k] += e.theta[k];
  }
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.influence[a] > s.influence[b]; });
  top_m = std::min(top_m, K);
  s.top_styles.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_m));
  s.insignificant.assign(order.begin() + static_cast<std::ptrdiff_t>(top_m), order.end());
  std::sort(s.insignificant.begin(), s.insignificant.end());
  for (std::size_t k : s.insignificant) s.insignificant_influence += s.influence[k];

  for (std::size_t k : s.top_styles) {
    std::vector<Scored> scored;
    for (std::size_t i = 0; i < collection.size(); ++i) scored.push_back({i, collection[i].theta[k]});
    s.exemplars.push_back(TopN(collection, std::move(scored), std::max<std::size_t>(exemplars_per_style, 1), "").Ids());
    if (exemplars_per_style == 0) s.exemplars.back().clear();
  }
  return s;
}

}  // namespace stylefactor
