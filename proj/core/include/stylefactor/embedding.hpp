#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stylefactor/corpus.hpp"
#include "stylefactor/matrix.hpp"
#include "stylefactor/sampler.hpp"

namespace stylefactor {

/// A document's mixture over the K styles; non-negative, sums to 1.
struct StyleEmbedding {
  std::string doc_id;
  std::vector<double> theta;

  friend bool operator==(const StyleEmbedding&, const StyleEmbedding&) = default;
};

struct FoldInParams {
  std::size_t sweeps = 200;
  std::size_t burn_in = 100;
  std::uint64_t seed = 1;

  void Check() const;
};

/// Embeddings produced under one model, in document order.
class EmbeddedCollection {
 public:
  EmbeddedCollection() = default;
  EmbeddedCollection(std::string model_digest, std::size_t num_topics, std::vector<StyleEmbedding> embeddings,
                     std::map<std::string, std::string> labels = {});

  const std::string& model_digest() const { return model_digest_; }
  std::size_t num_topics() const { return num_topics_; }
  std::size_t size() const { return embeddings_.size(); }
  bool empty() const { return embeddings_.empty(); }
  const std::vector<StyleEmbedding>& embeddings() const { return embeddings_; }
  const StyleEmbedding& operator[](std::size_t i) const { return embeddings_[i]; }
  const std::map<std::string, std::string>& labels() const { return labels_; }

  const StyleEmbedding* Find(std::string_view id) const;
  std::vector<std::string> Ids() const;
  Matrix ThetaMatrix() const;

  friend bool operator==(const EmbeddedCollection& a, const EmbeddedCollection& b) {
    return a.model_digest_ == b.model_digest_ && a.num_topics_ == b.num_topics_ &&
           a.embeddings_ == b.embeddings_ && a.labels_ == b.labels_;
  }

 private:
  std::string model_digest_;
  std::size_t num_topics_ = 0;
  std::vector<StyleEmbedding> embeddings_;
  std::map<std::string, std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Fold-in Gibbs with the model's phi frozen: each token's topic is
/// resampled from (n_dk^- + alpha) * phi[r][k][w]. Tokens unknown to the
/// model are skipped with a warning; a document with no known tokens throws.
StyleEmbedding InferTheta(const StyleModel& model, std::string doc_id,
                          const std::map<std::string, std::vector<std::string>>& tokens_by_region,
                          const FoldInParams& params);

StyleEmbedding InferTheta(const StyleModel& model, const Corpus& corpus, const OutfitDocument& doc,
                          const FoldInParams& params);

/// Seed used for one document when embedding a corpus under a master seed.
std::uint64_t DocumentSeed(std::uint64_t master_seed, std::string_view doc_id);

struct EmbedReport {
  EmbeddedCollection collection;
  std::vector<std::pair<std::string, std::string>> failures;  // (doc id, reason)
};

/// Embeds every document independently (seeds from DocumentSeed). Work is
/// spread over `threads` workers; results keep document order. Throws if the
/// corpus is empty or every document fails.
EmbedReport EmbedCorpus(const StyleModel& model, const Corpus& corpus, const FoldInParams& params,
                        std::size_t threads = 0);

/// Collection of the training documents' own theta rows.
EmbeddedCollection TrainingCollection(const StyleModel& model,
                                      const std::map<std::string, std::string>& labels = {});

void SaveEmbeddings(const EmbeddedCollection& collection, const std::filesystem::path& path);
EmbeddedCollection LoadEmbeddings(const std::filesystem::path& path);

}  // namespace stylefactor
