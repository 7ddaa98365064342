#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stylefactor/distance.hpp"
#include "stylefactor/embedding.hpp"

namespace stylefactor {

/// A set of style indices to blend. Duplicates collapse; indices are sorted.
class MixQuery {
 public:
  /// Throws Error(kInvalidArgument) for an empty set and Error(kOutOfRange)
  /// for indices >= num_topics.
  static MixQuery Create(std::vector<std::size_t> styles, std::size_t num_topics);

  const std::vector<std::size_t>& styles() const { return styles_; }

 private:
  std::vector<std::size_t> styles_;
};

struct RankedEntry {
  std::string id;
  double score = 0.0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/// Ranking with non-increasing scores, ties broken by ascending id.
/// Distance-based rankings report score = -distance.
struct RankedResult {
  std::vector<RankedEntry> entries;
  std::string query;

  std::vector<std::string> Ids() const;

  friend bool operator==(const RankedResult&, const RankedResult&) = default;
};

/// Nearest neighbours of `query_theta`. `exclude_id`, when given, is left out.
RankedResult Retrieve(const EmbeddedCollection& collection, std::span<const double> query_theta, std::size_t n,
                      SimplexMetric metric = SimplexMetric::kHellinger,
                      const std::optional<std::string>& exclude_id = std::nullopt);

/// Query by a stored document; the document itself is excluded.
RankedResult RetrieveById(const EmbeddedCollection& collection, const std::string& query_id, std::size_t n,
                          SimplexMetric metric = SimplexMetric::kHellinger);

/// min over t in S of theta_t.
double MixRelevance(std::span<const double> theta, const MixQuery& query);

RankedResult MixRetrieve(const EmbeddedCollection& collection, const MixQuery& query, std::size_t n);

/// One ranking per step toward m_s = (1 - l_s) e_src + l_s e_tgt with
/// l_s = s / (steps - 1). With `distinct`, a document is used at most once
/// across steps (greedy, first step first).
std::vector<RankedResult> Traverse(const EmbeddedCollection& collection, std::size_t src, std::size_t tgt,
                                   std::size_t steps, std::size_t n,
                                   SimplexMetric metric = SimplexMetric::kHellinger, bool distinct = false);

struct StyleSummary {
  std::vector<double> influence;          // column sums of theta; sums to N
  std::vector<std::size_t> top_styles;    // by influence, ties to lower index
  std::vector<std::vector<std::string>> exemplars;  // per top style, highest theta_k first
  std::vector<std::size_t> insignificant;  // remaining styles, ascending
  double insignificant_influence = 0.0;
};

StyleSummary Summarize(const EmbeddedCollection& collection, std::size_t top_m, std::size_t exemplars_per_style);

}  // namespace stylefactor
