#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stylefactor/applications.hpp"
#include "stylefactor/corpus.hpp"
#include "stylefactor/embedding.hpp"
#include "stylefactor/error.hpp"
#include "stylefactor/sampler.hpp"

namespace stylefactor {

// Query payloads shared by the CLI subcommands and the HTTP endpoints. Each
// payload is a JSON document terminated by a newline, so the CLI's stdout and
// the HTTP body for the same request are byte-identical.

struct RetrieveRequest {
  std::optional<std::string> query_id;
  std::optional<std::vector<double>> theta;
  std::size_t n = 10;
  std::string metric = "hellinger";
};

struct MixRequest {
  std::vector<long long> styles;
  std::size_t n = 10;
};

struct TraverseRequest {
  long long from = 0;
  long long to = 1;
  std::size_t steps = 5;
  std::size_t n = 5;
  std::string metric = "hellinger";
  bool distinct = false;
};

struct SummaryRequest {
  std::size_t top = 5;
  std::size_t exemplars = 3;
};

/// JSON request bodies of the POST endpoints. Malformed bodies throw
/// Error(kInvalidArgument).
RetrieveRequest ParseRetrieveRequest(std::string_view body);
MixRequest ParseMixRequest(std::string_view body);
TraverseRequest ParseTraverseRequest(std::string_view body);

/// Read-only query surface over immutable loaded artifacts; safe for
/// concurrent callers.
class StyleService {
 public:
  /// Throws Error(kDigestMismatch) when the collection was not produced by `model`.
  StyleService(StyleModel model, EmbeddedCollection collection, Corpus corpus);

  static StyleService Load(const std::filesystem::path& model_path, const std::filesystem::path& embeddings_path,
                           const std::filesystem::path& corpus_path);

  const StyleModel& model() const { return model_; }
  const EmbeddedCollection& collection() const { return collection_; }
  const Corpus& corpus() const { return corpus_; }

  std::string Health() const;
  /// Per topic, each region's top tokens by phi weight.
  std::string Styles(std::size_t top_tokens = 10) const;
  std::string Document(const std::string& id) const;
  std::string Retrieve(const RetrieveRequest& request) const;
  std::string Mix(const MixRequest& request) const;
  std::string Traverse(const TraverseRequest& request) const;
  std::string Summary(const SummaryRequest& request) const;

 private:
  StyleModel model_;
  EmbeddedCollection collection_;
  Corpus corpus_;
};

std::string RankingToJson(const RankedResult& result);

/// {"error": "..."} body with a trailing newline.
std::string ErrorPayload(const Error& error);
int HttpStatusFor(ErrorKind kind);

}  // namespace stylefactor
