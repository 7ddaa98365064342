#include "stylefactor/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "stylefactor/error.hpp"
#include "stylefactor/log.hpp"
#include "stylefactor/rng.hpp"

namespace stylefactor {

void FoldInParams::Check() const {
  if (sweeps < 1) throw Error(ErrorKind::kInvalidArgument, "fold-in sweeps must be >= 1");
  if (burn_in >= sweeps) throw Error(ErrorKind::kInvalidArgument, "fold-in burn_in must be < sweeps");
}

EmbeddedCollection::EmbeddedCollection(std::string model_digest, std::size_t num_topics,
                                       std::vector<StyleEmbedding> embeddings,
                                       std::map<std::string, std::string> labels)
    : model_digest_(std::move(model_digest)),
      num_topics_(num_topics),
      embeddings_(std::move(embeddings)),
      labels_(std::move(labels)) {
  for (std::size_t i = 0; i < embeddings_.size(); ++i) {
    if (embeddings_[i].theta.size() != num_topics_) {
      throw Error(ErrorKind::kValidation, "embedding '" + embeddings_[i].doc_id + "' has wrong dimension");
    }
    if (!index_.emplace(embeddings_[i].doc_id, i).second) {
      throw Error(ErrorKind::kValidation, "duplicate embedding id '" + embeddings_[i].doc_id + "'");
    }
  }
}

const StyleEmbedding* EmbeddedCollection::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &embeddings_[it->second];
}

std::vector<std::string> EmbeddedCollection::Ids() const {
  std::vector<std::string> ids;
  ids.reserve(embeddings_.size());
  for (const auto& e : embeddings_) ids.push_back(e.doc_id);
  return ids;
}

Matrix EmbeddedCollection::ThetaMatrix() const {
  Matrix m(embeddings_.size(), num_topics_);
  for (std::size_t i = 0; i < embeddings_.size(); ++i) {
    std::copy(embeddings_[i].theta.begin(), embeddings_[i].theta.end(), m.row(i).begin());
  }
  return m;
}

StyleEmbedding InferTheta(const StyleModel& model, std::string doc_id,
                          const std::map<std::string, std::vector<std::string>>& tokens_by_region,
                          const FoldInParams& params) {
  params.Check();
  const std::size_t K = model.num_topics();
  const double alpha = model.hyperparams.alpha;

  // Resolve tokens against the model vocabularies; keep pointers to phi columns.
  struct Token {
    const Matrix* phi;
    std::size_t region;
    TokenId word;
  };
  std::vector<Token> tokens;
  std::size_t skipped = 0;
  for (const auto& [region, bag] : tokens_by_region) {
    std::optional<std::size_t> r;
    for (std::size_t i = 0; i < model.regions.size(); ++i) {
      if (model.regions[i] == region) r = i;
    }
    for (const auto& tok : bag) {
      const auto w = r ? model.vocabularies[*r].Find(tok) : std::nullopt;
      if (!w) {
        ++skipped;
        continue;
      }
      tokens.push_back({&model.phi[*r], *r, *w});
    }
  }
  if (skipped > 0) {
    log::Warn("document '" + doc_id + "': skipped " + std::to_string(skipped) + " out-of-vocabulary token(s)");
  }
  if (tokens.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "document '" + doc_id + "' has no in-vocabulary tokens");
  }

  // Canonical token order makes the result independent of bag order.
  std::sort(tokens.begin(), tokens.end(), [](const Token& a, const Token& b) {
    return a.region != b.region ? a.region < b.region : a.word < b.word;
  });

  Rng rng(params.seed);
  std::vector<TopicId> z(tokens.size());
  std::vector<std::int64_t> ndk(K, 0);
  for (auto& t : z) {
    t = static_cast<TopicId>(rng.UniformIndex(K));
    ++ndk[t];
  }

  std::vector<double> acc(K, 0.0);
  std::vector<double> cum(K);
  const double den = static_cast<double>(tokens.size()) + static_cast<double>(K) * alpha;
  std::size_t samples = 0;
  for (std::size_t sweep = 1; sweep <= params.sweeps; ++sweep) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      --ndk[z[i]];
      const Matrix& phi = *tokens[i].phi;
      const TokenId w = tokens[i].word;
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        total += (static_cast<double>(ndk[k]) + alpha) * phi(k, w);
        cum[k] = total;
      }
      const double u = rng.Uniform() * total;
      TopicId k_new = static_cast<TopicId>(K - 1);
      for (std::size_t k = 0; k < K; ++k) {
        if (u < cum[k]) {
          k_new = static_cast<TopicId>(k);
          break;
        }
      }
      z[i] = k_new;
      ++ndk[k_new];
    }
    if (sweep > params.burn_in) {
      for (std::size_t k = 0; k < K; ++k) acc[k] += (static_cast<double>(ndk[k]) + alpha) / den;
      ++samples;
    }
  }
  double total = 0.0;
  for (auto& v : acc) {
    v /= static_cast<double>(samples);
    total += v;
  }
  for (auto& v : acc) v /= total;
  return {std::move(doc_id), std::move(acc)};
}

StyleEmbedding InferTheta(const StyleModel& model, const Corpus& corpus, const OutfitDocument& doc,
                          const FoldInParams& params) {
  return InferTheta(model, doc.id, corpus.TokenStrings(doc), params);
}

std::uint64_t DocumentSeed(std::uint64_t master_seed, std::string_view doc_id) {
  return MixSeed(master_seed ^ Fnv1a64(doc_id));
}

EmbedReport EmbedCorpus(const StyleModel& model, const Corpus& corpus, const FoldInParams& params,
                        std::size_t threads) {
  params.Check();
  if (corpus.documents.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot embed an empty corpus");
  const std::size_t n = corpus.documents.size();
  std::vector<std::optional<StyleEmbedding>> results(n);
  std::vector<std::string> errors(n);

  auto work = [&](std::size_t d) {
    const auto& doc = corpus.documents[d];
    FoldInParams p = params;
    p.seed = DocumentSeed(params.seed, doc.id);
    try {
      results[d] = InferTheta(model, corpus, doc, p);
    } catch (const Error& e) {
      errors[d] = e.what();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t d = 0; d < n; ++d) work(d);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t d = next++; d < n; d = next++) work(d);
      });
    }
  }

  EmbedReport report;
  std::vector<StyleEmbedding> embeddings;
  std::map<std::string, std::string> labels;
  for (std::size_t d = 0; d < n; ++d) {
    if (results[d]) {
      const auto& id = corpus.documents[d].id;
      if (auto it = corpus.labels.find(id); it != corpus.labels.end()) labels.emplace(id, it->second);
      embeddings.push_back(std::move(*results[d]));
    } else {
      report.failures.emplace_back(corpus.documents[d].id, errors[d]);
    }
  }
  if (embeddings.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "every document failed to embed; first error: " + report.failures.front().second);
  }
  report.collection =
      EmbeddedCollection(ModelDigest(model), model.num_topics(), std::move(embeddings), std::move(labels));
  return report;
}

EmbeddedCollection TrainingCollection(const StyleModel& model, const std::map<std::string, std::string>& labels) {
  std::vector<StyleEmbedding> embeddings;
  std::map<std::string, std::string> kept;
  for (std::size_t d = 0; d < model.train_doc_ids.size(); ++d) {
    const auto row = model.theta_train.row(d);
    embeddings.push_back({model.train_doc_ids[d], {row.begin(), row.end()}});
    if (auto it = labels.find(model.train_doc_ids[d]); it != labels.end()) kept.emplace(it->first, it->second);
  }
  return EmbeddedCollection(ModelDigest(model), model.num_topics(), std::move(embeddings), std::move(kept));
}

void SaveEmbeddings(const EmbeddedCollection& collection, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write embeddings file '" + path.string() + "'");
  nlohmann::ordered_json header;
  header["_model_digest"] = collection.model_digest();
  header["K"] = collection.num_topics();
  out << header.dump() << '\n';
  for (const auto& e : collection.embeddings()) {
    nlohmann::ordered_json rec;
    rec["id"] = e.doc_id;
    rec["theta"] = e.theta;
    if (auto it = collection.labels().find(e.doc_id); it != collection.labels().end()) rec["label"] = it->second;
    out << rec.dump() << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

EmbeddedCollection LoadEmbeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open embeddings file '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  std::string digest;
  std::optional<std::size_t> K;
  std::vector<StyleEmbedding> embeddings;
  std::map<std::string, std::string> labels;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(std::string("invalid JSON: ") + e.what());
    }
    try {
      if (rec.contains("_model_digest")) {
        if (K) fail("header must be the first record");
        digest = rec.at("_model_digest").get<std::string>();
        K = rec.at("K").get<std::size_t>();
        continue;
      }
      if (!K) fail("missing header line with _model_digest");
      StyleEmbedding e{rec.at("id").get<std::string>(), rec.at("theta").get<std::vector<double>>()};
      if (e.theta.size() != *K) fail("theta has wrong dimension");
      if (rec.contains("label")) labels[e.doc_id] = rec.at("label").get<std::string>();
      embeddings.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
  }
  if (!K) throw Error(ErrorKind::kParse, path.string() + ": empty embeddings file");
  return EmbeddedCollection(digest, *K, std::move(embeddings), std::move(labels));
}

}  // namespace stylefactor
