#include "stylefactor/api.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"
#include "stylefactor/distance.hpp"

namespace stylefactor {
namespace {

using json = nlohmann::ordered_json;

std::string Finish(const json& j) { return j.dump() + "\n"; }

json RankingJson(const RankedResult& result) {
  json arr = json::array();
  for (const auto& e : result.entries) arr.push_back({{"id", e.id}, {"score", e.score}});
  return arr;
}

json ParseBody(std::string_view body) {
  try {
    auto j = json::parse(body);
    if (!j.is_object()) throw Error(ErrorKind::kInvalidArgument, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed JSON body: ") + e.what());
  }
}

template <typename T>
T Field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::kInvalidArgument, std::string("field '") + key + "' has the wrong type");
  }
}

std::size_t Count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw Error(ErrorKind::kInvalidArgument, std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::size_t TopicIndex(long long k, std::size_t num_topics) {
  if (k < 0 || static_cast<std::size_t>(k) >= num_topics) {
    throw Error(ErrorKind::kOutOfRange,
                "style index " + std::to_string(k) + " out of range (K=" + std::to_string(num_topics) + ")");
  }
  return static_cast<std::size_t>(k);
}

}  // namespace

RetrieveRequest ParseRetrieveRequest(std::string_view body) {
  const auto j = ParseBody(body);
  RetrieveRequest r;
  if (j.contains("query_id")) r.query_id = Field<std::string>(j, "query_id", "");
  if (j.contains("theta")) r.theta = Field<std::vector<double>>(j, "theta", {});
  r.n = Count(j, "n", r.n);
  r.metric = Field<std::string>(j, "metric", r.metric);
  return r;
}

MixRequest ParseMixRequest(std::string_view body) {
  const auto j = ParseBody(body);
  if (!j.contains("styles")) throw Error(ErrorKind::kInvalidArgument, "mix request needs 'styles'");
  MixRequest r;
  r.styles = Field<std::vector<long long>>(j, "styles", {});
  r.n = Count(j, "n", r.n);
  return r;
}

TraverseRequest ParseTraverseRequest(std::string_view body) {
  const auto j = ParseBody(body);
  if (!j.contains("from") || !j.contains("to")) {
    throw Error(ErrorKind::kInvalidArgument, "traverse request needs 'from' and 'to'");
  }
  TraverseRequest r;
  r.from = Field<long long>(j, "from", 0);
  r.to = Field<long long>(j, "to", 0);
  r.steps = Count(j, "steps", r.steps);
  r.n = Count(j, "n", r.n);
  r.metric = Field<std::string>(j, "metric", r.metric);
  r.distinct = Field<bool>(j, "distinct", r.distinct);
  return r;
}

StyleService::StyleService(StyleModel model, EmbeddedCollection collection, Corpus corpus)
    : model_(std::move(model)), collection_(std::move(collection)), corpus_(std::move(corpus)) {
  const auto digest = ModelDigest(model_);
  if (collection_.model_digest() != digest) {
    throw Error(ErrorKind::kDigestMismatch, "embeddings were produced by model " + collection_.model_digest() +
                                                ", loaded model is " + digest);
  }
}

StyleService StyleService::Load(const std::filesystem::path& model_path,
                                const std::filesystem::path& embeddings_path,
                                const std::filesystem::path& corpus_path) {
  return StyleService(LoadModel(model_path), LoadEmbeddings(embeddings_path), LoadCorpus(corpus_path));
}

std::string StyleService::Health() const {
  return Finish({{"status", "ok"},
                 {"model_digest", collection_.model_digest()},
                 {"K", model_.num_topics()},
                 {"documents", collection_.size()}});
}

std::string StyleService::Styles(std::size_t top_tokens) const {
  json out = json::array();
  const std::size_t K = model_.num_topics();
  for (std::size_t k = 0; k < K; ++k) {
    json regions = json::object();
    for (std::size_t r = 0; r < model_.regions.size(); ++r) {
      const auto row = model_.phi[r].row(k);
      std::vector<std::size_t> order(row.size());
      std::iota(order.begin(), order.end(), 0);
      const std::size_t take = std::min(top_tokens, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                        [&](std::size_t a, std::size_t b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });
      json tokens = json::array();
      for (std::size_t i = 0; i < take; ++i) {
        tokens.push_back({{"token", model_.vocabularies[r].token(static_cast<TokenId>(order[i]))},
                          {"weight", row[order[i]]}});
      }
      regions[model_.regions[r]] = std::move(tokens);
    }
    out.push_back({{"topic", k}, {"regions", std::move(regions)}});
  }
  return Finish(out);
}

std::string StyleService::Document(const std::string& id) const {
  const auto* emb = collection_.Find(id);
  if (!emb) throw Error(ErrorKind::kNotFound, "unknown document id '" + id + "'");
  json j;
  j["id"] = id;
  json tokens = json::object();
  if (const auto* doc = corpus_.FindDocument(id)) {
    for (const auto& [region, bag] : corpus_.TokenStrings(*doc)) {
      if (!bag.empty()) tokens[region] = bag;
    }
    j["tokens"] = std::move(tokens);
    j["theta"] = emb->theta;
    if (doc->image_url) j["image_url"] = *doc->image_url;
  } else {
    j["tokens"] = std::move(tokens);
    j["theta"] = emb->theta;
  }
  return Finish(j);
}

std::string StyleService::Retrieve(const RetrieveRequest& request) const {
  const auto metric = ParseSimplexMetric(request.metric);
  if (request.query_id.has_value() == request.theta.has_value()) {
    throw Error(ErrorKind::kInvalidArgument, "retrieve needs exactly one of query_id or theta");
  }
  if (request.query_id) {
    return Finish(RankingJson(RetrieveById(collection_, *request.query_id, request.n, metric)));
  }
  return Finish(RankingJson(stylefactor::Retrieve(collection_, *request.theta, request.n, metric)));
}

std::string StyleService::Mix(const MixRequest& request) const {
  std::vector<std::size_t> styles;
  for (long long k : request.styles) styles.push_back(TopicIndex(k, collection_.num_topics()));
  const auto query = MixQuery::Create(std::move(styles), collection_.num_topics());
  return Finish(RankingJson(MixRetrieve(collection_, query, request.n)));
}

std::string StyleService::Traverse(const TraverseRequest& request) const {
  const auto metric = ParseSimplexMetric(request.metric);
  const auto steps = stylefactor::Traverse(collection_, TopicIndex(request.from, collection_.num_topics()),
                                           TopicIndex(request.to, collection_.num_topics()), request.steps,
                                           request.n, metric, request.distinct);
  json out = json::array();
  for (const auto& s : steps) out.push_back(RankingJson(s));
  return Finish(out);
}

std::string StyleService::Summary(const SummaryRequest& request) const {
  const auto s = Summarize(collection_, request.top, request.exemplars);
  json j;
  j["documents"] = collection_.size();
  j["influence"] = s.influence;
  j["top_styles"] = s.top_styles;
  j["exemplars"] = s.exemplars;
  j["insignificant"] = {{"styles", s.insignificant}, {"influence", s.insignificant_influence}};
  return Finish(j);
}

std::string RankingToJson(const RankedResult& result) { return Finish(RankingJson(result)); }

std::string ErrorPayload(const Error& error) {
  return Finish({{"error", error.what()}, {"kind", std::string(ErrorKindName(error.kind()))}});
}

int HttpStatusFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kParse:
    case ErrorKind::kSchema:
    case ErrorKind::kValidation:
      return 400;
    case ErrorKind::kNotFound:
      return 404;
    case ErrorKind::kOutOfRange:
      return 422;
    default:
      return 500;
  }
}

}  // namespace stylefactor
