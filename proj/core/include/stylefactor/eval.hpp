#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stylefactor/applications.hpp"
#include "stylefactor/corpus.hpp"
#include "stylefactor/distance.hpp"
#include "stylefactor/embedding.hpp"
#include "stylefactor/matrix.hpp"

namespace stylefactor {

/// Assignment of every document id to exactly one integer cluster/label.
class Partition {
 public:
  Partition() = default;
  Partition(std::vector<std::string> ids, std::vector<int> labels);

  /// Label ids follow the sorted order of the distinct label strings.
  static Partition FromLabels(const std::map<std::string, std::string>& labels);
  /// Restricted to `ids`, in that order; every id must be labeled.
  static Partition FromLabels(const std::map<std::string, std::string>& labels, const std::vector<std::string>& ids);
  /// argmax of each theta row, ties to the lower topic.
  static Partition DominantTopic(const std::vector<std::string>& ids, const Matrix& theta);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<int>& labels() const { return labels_; }
  std::optional<int> LabelOf(std::string_view id) const;
  /// Strings behind label ids when built from string labels; empty otherwise.
  const std::vector<std::string>& label_names() const { return names_; }
  /// Distinct label ids, ascending.
  std::vector<int> DistinctLabels() const;

 private:
  std::vector<std::string> ids_;
  std::vector<int> labels_;
  std::vector<std::string> names_;
  std::map<std::string, int, std::less<>> index_;
};

/// I(a;b) / sqrt(H(a) H(b)). When either entropy is zero the score is 1 if
/// both partitions are single-cluster and 0 otherwise.
double Nmi(const Partition& a, const Partition& b);

/// Mean precision at the rank of each relevant document, ranking by
/// descending score with ties broken by ascending id (or index when `ids` is
/// empty). Throws if nothing is relevant.
double AveragePrecision(std::span<const double> scores, const std::vector<bool>& relevant,
                        std::span<const std::string> ids = {});

struct StyleAp {
  int label = 0;
  std::string name;
  std::size_t best_topic = 0;
  double ap = 0.0;
};

struct MaxApResult {
  double mean = 0.0;
  std::vector<StyleAp> per_style;
};

/// For every style, the best AP over topics when sorting documents by that
/// topic's theta column; averaged over styles. `ids` name theta's rows.
MaxApResult AvgMaxAp(const std::vector<std::string>& ids, const Matrix& theta, const Partition& truth);

/// Binary-gain NDCG@n with log2(rank + 1) discount against the ideal ranking
/// given every relevant document in `truth`. Zero (with a warning) if none exist.
double Ndcg(std::span<const std::string> ranking, const Partition& truth, int query_label, std::size_t n);

/// Documents as binary indicators over the region-prefixed vocabulary.
struct IndicatorMatrix {
  std::vector<std::string> ids;
  std::vector<std::string> features;
  Matrix values;  // M x V, entries 0 or 1
};
IndicatorMatrix AttributeIndicator(const Corpus& corpus);

struct KMeansResult {
  std::vector<int> assignments;
  Matrix centroids;
  std::vector<double> objective_history;  // within-cluster SSE after each iteration
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lloyd's algorithm from seeded k-means++ centres. An emptied cluster is
/// re-seeded at the point farthest from its current centre.
KMeansResult KMeans(const Matrix& vectors, std::size_t k, std::uint64_t seed, std::size_t max_iters = 100);

enum class SetDistance { kHamming, kJaccard };
SetDistance ParseSetDistance(std::string_view name);

double IndicatorDistance(SetDistance distance, std::span<const double> a, std::span<const double> b);

struct DiversityNovelty {
  double diversity = 0.0;  // mean pairwise distance among results
  double novelty = 0.0;    // mean distance from results to the query
};

/// Computed over attribute-indicator vectors with a fixed distance.
DiversityNovelty ComputeDiversityNovelty(const IndicatorMatrix& indicators, const RankedResult& results,
                                         const std::string& query_id, SetDistance distance = SetDistance::kHamming);

struct EvalProvenance {
  std::string method;  // e.g. "polylda", "attributes+kmeans"
  std::string corpus_digest;
  std::string model_digest;
  std::uint64_t seed = 0;
};

struct EvalReport {
  double nmi = 0.0;
  double avg_max_ap = 0.0;
  std::vector<StyleAp> per_style;
  std::optional<double> ndcg;
  std::optional<std::size_t> ndcg_depth;
  std::optional<double> diversity;
  std::optional<double> novelty;
  // Against planted topics, when known.
  std::optional<double> phi_mean_tv;
  std::optional<double> region_alignment;
  EvalProvenance provenance;

  std::string ToJson() const;
  static EvalReport FromJson(std::string_view text);
};

/// Topic-model discovery scores: NMI of the dominant-topic partition and
/// averaged maximal AP of the theta columns.
EvalReport DiscoveryReport(const EmbeddedCollection& collection, const std::map<std::string, std::string>& labels,
                           EvalProvenance provenance = {});

/// Baseline discovery scores for a hard clustering; its one-hot indicators
/// stand in for theta in the AP computation.
EvalReport DiscoveryReport(const Partition& clustering, const std::map<std::string, std::string>& labels,
                           EvalProvenance provenance = {});

/// Adds mean NDCG@n, diversity and novelty over every labeled document used
/// as a query (excluded from its own results).
void AddRetrievalScores(EvalReport& report, const EmbeddedCollection& collection, const Corpus& corpus,
                        std::size_t n, SimplexMetric metric = SimplexMetric::kHellinger,
                        SetDistance distance = SetDistance::kHamming);

void SaveEvalReport(const EvalReport& report, const std::filesystem::path& path);

}  // namespace stylefactor
