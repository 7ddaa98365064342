#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stylefactor/corpus.hpp"
#include "stylefactor/matrix.hpp"
#include "stylefactor/rng.hpp"

namespace stylefactor {

using TopicId = std::uint32_t;

struct Hyperparams {
  std::size_t num_topics = 10;
  double alpha = 5.0;   // symmetric Dirichlet on document mixtures
  double beta = 0.01;   // symmetric Dirichlet on region word distributions
  std::size_t sweeps = 1000;
  std::size_t burn_in = 500;
  std::size_t sample_lag = 10;
  std::uint64_t seed = 1;

  /// alpha = 50/K, beta = 0.01, 1000 sweeps, 500 burn-in, lag 10.
  static Hyperparams Defaults(std::size_t num_topics);

  void Check() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Collapsed Gibbs state for the region-tuple topic model. Tokens are stored
/// flat in document order; within a document, region by region. The
/// doc-topic table pools all regions of a document (one mixture per tuple);
/// topic-word tables are kept per region.
class ModelState {
 public:
  /// Uniformly random initial topics drawn from Rng(hp.seed).
  static ModelState Initialize(const Corpus& corpus, const Hyperparams& hp);

  /// State from explicit assignments, `assignments[d][r][j]` for token j of
  /// region r in document d.
  static ModelState FromAssignments(const Corpus& corpus, std::size_t num_topics,
                                    const std::vector<std::vector<std::vector<TopicId>>>& assignments,
                                    Rng rng = Rng(0));

  std::size_t num_topics() const { return num_topics_; }
  std::size_t num_documents() const { return doc_offsets_.size() - 1; }
  std::size_t num_regions() const { return vocab_sizes_.size(); }
  std::size_t num_tokens() const { return z_.size(); }
  std::size_t vocab_size(std::size_t r) const { return vocab_sizes_[r]; }

  std::int64_t doc_topic(std::size_t d, std::size_t k) const { return ndk_[d * num_topics_ + k]; }
  std::int64_t topic_word(std::size_t r, std::size_t k, std::size_t w) const {
    return nkw_[r][w * num_topics_ + k];
  }
  std::int64_t topic_total(std::size_t r, std::size_t k) const { return nk_[r][k]; }
  std::size_t doc_length(std::size_t d) const { return doc_offsets_[d + 1] - doc_offsets_[d]; }

  /// Flat token indices [begin, end) of document d.
  std::size_t doc_begin(std::size_t d) const { return doc_offsets_[d]; }
  std::size_t doc_end(std::size_t d) const { return doc_offsets_[d + 1]; }
  std::uint32_t token_region(std::size_t i) const { return regions_[i]; }
  TokenId token_word(std::size_t i) const { return words_[i]; }
  TopicId topic(std::size_t i) const { return z_[i]; }
  std::span<const TopicId> topics() const { return z_; }

  /// assignments[d][r][j]; inverse of FromAssignments.
  std::vector<std::vector<std::vector<TopicId>>> Assignments() const;

  /// Removes token i from the count tables (its topic is kept).
  void Exclude(std::size_t i);
  /// Sets token i to topic k and adds it back to the count tables.
  void Include(std::size_t i, TopicId k);

  /// Human-readable descriptions of broken count invariants; empty if consistent.
  std::vector<std::string> CheckInvariants() const;

  /// Relabels topics: new topic of an old topic t is perm[t].
  ModelState Permuted(std::span<const TopicId> perm) const;

  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

  /// Assignments plus generator state; counts are rebuilt on restore.
  std::string Serialize() const;
  static ModelState Deserialize(const Corpus& corpus, std::string_view text);

  friend bool operator==(const ModelState&, const ModelState&) = default;

 private:
  friend void GibbsSweep(ModelState&, const Hyperparams&);

  ModelState() = default;
  void BuildLayout(const Corpus& corpus, std::size_t num_topics);
  void RebuildCounts();

  std::size_t num_topics_ = 0;
  std::vector<std::size_t> vocab_sizes_;
  std::vector<std::size_t> doc_offsets_;
  std::vector<std::uint32_t> regions_;
  std::vector<TokenId> words_;
  std::vector<TopicId> z_;
  std::vector<std::int64_t> ndk_;               // M x K
  std::vector<std::vector<std::int64_t>> nkw_;  // per region, V_r x K (word-major)
  std::vector<std::vector<std::int64_t>> nk_;   // per region, K
  Rng rng_;
};

/// Normalized p(z = k | rest) for a token of word w in region r of document
/// d, computed from the state's current counts. The caller must already have
/// excluded that token (ModelState::Exclude).
std::vector<double> FullConditional(const ModelState& state, const Hyperparams& hp, std::size_t doc,
                                    std::size_t region, TokenId word);

/// Resamples every token once, in flat order, from its full conditional.
void GibbsSweep(ModelState& state, const Hyperparams& hp);

/// Collapsed joint log p(words, topics | alpha, beta).
double LogLikelihood(const ModelState& state, const Hyperparams& hp);

struct Provenance {
  std::string corpus_digest;
  std::size_t sweeps = 0;
  std::uint64_t seed = 0;
  std::size_t num_samples = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Trained artifact: per-region topic-word distributions and the mixtures of
/// the training documents.
struct StyleModel {
  Hyperparams hyperparams;
  std::vector<std::string> regions;
  std::vector<Vocabulary> vocabularies;
  std::vector<Matrix> phi;  // per region, K x V_r, rows sum to 1
  Matrix theta_train;       // M x K, rows sum to 1
  std::vector<std::string> train_doc_ids;
  Provenance provenance;

  std::size_t num_topics() const { return hyperparams.num_topics; }

  friend bool operator==(const StyleModel&, const StyleModel&) = default;
};

struct TrainOptions {
  std::size_t progress_every = 100;  // 0 disables progress reporting
  std::function<void(std::size_t sweep, double log_likelihood)> on_progress;
};

/// Runs hp.sweeps sweeps; every sample_lag sweeps after burn-in the
/// posterior-mean estimates of phi and theta are accumulated and averaged.
StyleModel Train(const Corpus& corpus, const Hyperparams& hp, const TrainOptions& options = {});

/// Posterior-mean estimates from a single state.
Matrix EstimateTheta(const ModelState& state, const Hyperparams& hp);
std::vector<Matrix> EstimatePhi(const ModelState& state, const Hyperparams& hp);

inline constexpr int kModelFormatVersion = 1;

std::string ModelToJson(const StyleModel& model);
StyleModel ModelFromJson(std::string_view text, std::string_view source = "<model>");
void SaveModel(const StyleModel& model, const std::filesystem::path& path);
StyleModel LoadModel(const std::filesystem::path& path);
/// Hash of the canonical serialized model.
std::string ModelDigest(const StyleModel& model);

}  // namespace stylefactor
