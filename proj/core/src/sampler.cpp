#include "stylefactor/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "stylefactor/error.hpp"
#include "stylefactor/log.hpp"

namespace stylefactor {

Hyperparams Hyperparams::Defaults(std::size_t num_topics) {
  Hyperparams hp;
  hp.num_topics = num_topics;
  hp.alpha = num_topics > 0 ? 50.0 / static_cast<double>(num_topics) : 1.0;
  hp.beta = 0.01;
  return hp;
}

void Hyperparams::Check() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, "hyperparams: " + what); };
  if (num_topics < 1) fail("K must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) fail("beta must be > 0");
  if (sweeps < 1) fail("sweeps must be >= 1");
  if (burn_in >= sweeps) fail("burn_in must be < sweeps");
  if (sample_lag < 1) fail("sample_lag must be >= 1");
}

void ModelState::BuildLayout(const Corpus& corpus, std::size_t num_topics) {
  num_topics_ = num_topics;
  vocab_sizes_.clear();
  for (const auto& v : corpus.vocabularies) vocab_sizes_.push_back(v.size());
  const std::size_t total = corpus.TotalTokens();
  doc_offsets_.assign(1, 0);
  doc_offsets_.reserve(corpus.num_documents() + 1);
  regions_.clear();
  words_.clear();
  regions_.reserve(total);
  words_.reserve(total);
  for (const auto& doc : corpus.documents) {
    for (std::size_t r = 0; r < doc.tokens_by_region.size(); ++r) {
      for (TokenId w : doc.tokens_by_region[r]) {
        regions_.push_back(static_cast<std::uint32_t>(r));
        words_.push_back(w);
      }
    }
    doc_offsets_.push_back(words_.size());
  }
  z_.assign(total, 0);
}

void ModelState::RebuildCounts() {
  const std::size_t K = num_topics_;
  ndk_.assign(num_documents() * K, 0);
  nkw_.assign(num_regions(), {});
  nk_.assign(num_regions(), std::vector<std::int64_t>(K, 0));
  for (std::size_t r = 0; r < num_regions(); ++r) nkw_[r].assign(vocab_sizes_[r] * K, 0);
  for (std::size_t d = 0; d < num_documents(); ++d) {
    for (std::size_t i = doc_offsets_[d]; i < doc_offsets_[d + 1]; ++i) {
      const TopicId k = z_[i];
      ++ndk_[d * K + k];
      ++nkw_[regions_[i]][words_[i] * K + k];
      ++nk_[regions_[i]][k];
    }
  }
}

ModelState ModelState::Initialize(const Corpus& corpus, const Hyperparams& hp) {
  hp.Check();
  RequireValid(corpus);
  if (corpus.documents.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot sample an empty corpus");
  ModelState s;
  s.BuildLayout(corpus, hp.num_topics);
  s.rng_ = Rng(hp.seed);
  for (auto& z : s.z_) z = static_cast<TopicId>(s.rng_.UniformIndex(hp.num_topics));
  s.RebuildCounts();
  return s;
}

ModelState ModelState::FromAssignments(const Corpus& corpus, std::size_t num_topics,
                                       const std::vector<std::vector<std::vector<TopicId>>>& assignments,
                                       Rng rng) {
  RequireValid(corpus);
  if (num_topics < 1) throw Error(ErrorKind::kInvalidArgument, "K must be >= 1");
  if (assignments.size() != corpus.num_documents()) {
    throw Error(ErrorKind::kInvalidArgument, "assignments must cover every document");
  }
  ModelState s;
  s.BuildLayout(corpus, num_topics);
  s.rng_ = std::move(rng);
  std::size_t i = 0;
  for (std::size_t d = 0; d < corpus.num_documents(); ++d) {
    const auto& doc = corpus.documents[d];
    if (assignments[d].size() != doc.tokens_by_region.size()) {
      throw Error(ErrorKind::kInvalidArgument, "assignment region count mismatch for '" + doc.id + "'");
    }
    for (std::size_t r = 0; r < doc.tokens_by_region.size(); ++r) {
      if (assignments[d][r].size() != doc.tokens_by_region[r].size()) {
        throw Error(ErrorKind::kInvalidArgument, "assignment length mismatch for '" + doc.id + "'");
      }
      for (TopicId k : assignments[d][r]) {
        if (k >= num_topics) throw Error(ErrorKind::kOutOfRange, "topic id out of range in assignments");
        s.z_[i++] = k;
      }
    }
  }
  s.RebuildCounts();
  return s;
}

std::vector<std::vector<std::vector<TopicId>>> ModelState::Assignments() const {
  std::vector<std::vector<std::vector<TopicId>>> out(num_documents());
  for (std::size_t d = 0; d < num_documents(); ++d) {
    out[d].resize(num_regions());
    for (std::size_t i = doc_offsets_[d]; i < doc_offsets_[d + 1]; ++i) out[d][regions_[i]].push_back(z_[i]);
  }
  return out;
}

void ModelState::Exclude(std::size_t i) {
  const TopicId k = z_[i];
  const std::size_t d = static_cast<std::size_t>(
      std::upper_bound(doc_offsets_.begin(), doc_offsets_.end(), i) - doc_offsets_.begin() - 1);
  --ndk_[d * num_topics_ + k];
  --nkw_[regions_[i]][words_[i] * num_topics_ + k];
  --nk_[regions_[i]][k];
}

void ModelState::Include(std::size_t i, TopicId k) {
  const std::size_t d = static_cast<std::size_t>(
      std::upper_bound(doc_offsets_.begin(), doc_offsets_.end(), i) - doc_offsets_.begin() - 1);
  z_[i] = k;
  ++ndk_[d * num_topics_ + k];
  ++nkw_[regions_[i]][words_[i] * num_topics_ + k];
  ++nk_[regions_[i]][k];
}

std::vector<std::string> ModelState::CheckInvariants() const {
  std::vector<std::string> problems;
  const std::size_t K = num_topics_;
  std::int64_t doc_total = 0;
  for (std::size_t d = 0; d < num_documents(); ++d) {
    std::int64_t sum = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const auto c = ndk_[d * K + k];
      if (c < 0) problems.push_back("negative doc-topic count at doc " + std::to_string(d));
      sum += c;
    }
    if (sum != static_cast<std::int64_t>(doc_length(d))) {
      problems.push_back("doc-topic counts of doc " + std::to_string(d) + " do not sum to its length");
    }
    doc_total += sum;
  }
  std::int64_t topic_total_all = 0;
  for (std::size_t r = 0; r < num_regions(); ++r) {
    for (std::size_t k = 0; k < K; ++k) {
      std::int64_t sum = 0;
      for (std::size_t w = 0; w < vocab_sizes_[r]; ++w) {
        const auto c = nkw_[r][w * K + k];
        if (c < 0) problems.push_back("negative topic-word count in region " + std::to_string(r));
        sum += c;
      }
      if (nk_[r][k] < 0) problems.push_back("negative topic total in region " + std::to_string(r));
      if (sum != nk_[r][k]) {
        problems.push_back("topic-word counts of region " + std::to_string(r) + " topic " + std::to_string(k) +
                           " do not match topic total");
      }
      topic_total_all += nk_[r][k];
    }
  }
  const auto n = static_cast<std::int64_t>(z_.size());
  if (doc_total != n || topic_total_all != n) problems.push_back("token count not conserved");
  // Counts must also agree with the assignments themselves.
  ModelState rebuilt = *this;
  rebuilt.RebuildCounts();
  if (rebuilt.ndk_ != ndk_ || rebuilt.nkw_ != nkw_ || rebuilt.nk_ != nk_) {
    problems.push_back("count tables disagree with assignments");
  }
  return problems;
}

ModelState ModelState::Permuted(std::span<const TopicId> perm) const {
  if (perm.size() != num_topics_) throw Error(ErrorKind::kInvalidArgument, "permutation size must equal K");
  ModelState out = *this;
  for (auto& z : out.z_) z = perm[z];
  out.RebuildCounts();
  return out;
}

std::string ModelState::Serialize() const {
  nlohmann::json j;
  j["num_topics"] = num_topics_;
  j["z"] = z_;
  j["rng"] = rng_.Serialize();
  return j.dump();
}

ModelState ModelState::Deserialize(const Corpus& corpus, std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelState s;
    s.BuildLayout(corpus, j.at("num_topics").get<std::size_t>());
    auto z = j.at("z").get<std::vector<TopicId>>();
    if (z.size() != s.z_.size()) throw Error(ErrorKind::kSchema, "state does not match corpus token count");
    for (TopicId k : z) {
      if (k >= s.num_topics_) throw Error(ErrorKind::kSchema, "topic id out of range in state");
    }
    s.z_ = std::move(z);
    s.rng_ = Rng::Deserialize(j.at("rng").get<std::string>());
    s.RebuildCounts();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed sampler state: ") + e.what());
  }
}

std::vector<double> FullConditional(const ModelState& state, const Hyperparams& hp, std::size_t doc,
                                    std::size_t region, TokenId word) {
  const std::size_t K = state.num_topics();
  const double vbeta = static_cast<double>(state.vocab_size(region)) * hp.beta;
  std::vector<double> p(K);
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    p[k] = (static_cast<double>(state.doc_topic(doc, k)) + hp.alpha) *
           (static_cast<double>(state.topic_word(region, k, word)) + hp.beta) /
           (static_cast<double>(state.topic_total(region, k)) + vbeta);
    total += p[k];
  }
  for (auto& v : p) v /= total;
  return p;
}

void GibbsSweep(ModelState& s, const Hyperparams& hp) {
  const std::size_t K = s.num_topics_;
  const double alpha = hp.alpha;
  const double beta = hp.beta;
  const std::size_t R = s.num_regions();

  // Reciprocal denominators 1 / (n_k^(r) + V_r beta), refreshed whenever n_k^(r) changes.
  std::vector<double> vbeta(R);
  std::vector<std::vector<double>> inv_den(R, std::vector<double>(K));
  for (std::size_t r = 0; r < R; ++r) {
    vbeta[r] = static_cast<double>(s.vocab_sizes_[r]) * beta;
    for (std::size_t k = 0; k < K; ++k) inv_den[r][k] = 1.0 / (static_cast<double>(s.nk_[r][k]) + vbeta[r]);
  }
  std::vector<double> cum(K);

  for (std::size_t d = 0; d < s.num_documents(); ++d) {
    std::int64_t* ndk = s.ndk_.data() + d * K;
    for (std::size_t i = s.doc_offsets_[d]; i < s.doc_offsets_[d + 1]; ++i) {
      const std::uint32_t r = s.regions_[i];
      std::int64_t* nkw = s.nkw_[r].data() + static_cast<std::size_t>(s.words_[i]) * K;
      std::int64_t* nk = s.nk_[r].data();
      double* inv = inv_den[r].data();

      const TopicId old = s.z_[i];
      --ndk[old];
      --nkw[old];
      --nk[old];
      inv[old] = 1.0 / (static_cast<double>(nk[old]) + vbeta[r]);

      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        total += (static_cast<double>(ndk[k]) + alpha) * (static_cast<double>(nkw[k]) + beta) * inv[k];
        cum[k] = total;
      }
      const double u = s.rng_.Uniform() * total;
      TopicId k_new = static_cast<TopicId>(K - 1);
      for (std::size_t k = 0; k < K; ++k) {
        if (u < cum[k]) {
          k_new = static_cast<TopicId>(k);
          break;
        }
      }

      s.z_[i] = k_new;
      ++ndk[k_new];
      ++nkw[k_new];
      ++nk[k_new];
      inv[k_new] = 1.0 / (static_cast<double>(nk[k_new]) + vbeta[r]);
    }
  }
}

double LogLikelihood(const ModelState& state, const Hyperparams& hp) {
  const std::size_t K = state.num_topics();
  const double alpha = hp.alpha;
  const double beta = hp.beta;
  const double kalpha = static_cast<double>(K) * alpha;
  const double lg_alpha = std::lgamma(alpha);
  const double lg_beta = std::lgamma(beta);

  double ll = 0.0;
  for (std::size_t d = 0; d < state.num_documents(); ++d) {
    ll += std::lgamma(kalpha) - std::lgamma(static_cast<double>(state.doc_length(d)) + kalpha);
    for (std::size_t k = 0; k < K; ++k) {
      const auto c = state.doc_topic(d, k);
      if (c > 0) ll += std::lgamma(static_cast<double>(c) + alpha) - lg_alpha;
    }
  }
  for (std::size_t r = 0; r < state.num_regions(); ++r) {
    const double vbeta = static_cast<double>(state.vocab_size(r)) * beta;
    for (std::size_t k = 0; k < K; ++k) {
      ll += std::lgamma(vbeta) - std::lgamma(static_cast<double>(state.topic_total(r, k)) + vbeta);
      for (std::size_t w = 0; w < state.vocab_size(r); ++w) {
        const auto c = state.topic_word(r, k, w);
        if (c > 0) ll += std::lgamma(static_cast<double>(c) + beta) - lg_beta;
      }
    }
  }
  return ll;
}

Matrix EstimateTheta(const ModelState& state, const Hyperparams& hp) {
  const std::size_t K = state.num_topics();
  Matrix theta(state.num_documents(), K);
  for (std::size_t d = 0; d < state.num_documents(); ++d) {
    const double den = static_cast<double>(state.doc_length(d)) + static_cast<double>(K) * hp.alpha;
    for (std::size_t k = 0; k < K; ++k) {
      theta(d, k) = (static_cast<double>(state.doc_topic(d, k)) + hp.alpha) / den;
    }
  }
  return theta;
}

std::vector<Matrix> EstimatePhi(const ModelState& state, const Hyperparams& hp) {
  const std::size_t K = state.num_topics();
  std::vector<Matrix> phi;
  for (std::size_t r = 0; r < state.num_regions(); ++r) {
    const std::size_t V = state.vocab_size(r);
    Matrix m(K, V);
    for (std::size_t k = 0; k < K; ++k) {
      const double den = static_cast<double>(state.topic_total(r, k)) + static_cast<double>(V) * hp.beta;
      for (std::size_t w = 0; w < V; ++w) {
        m(k, w) = (static_cast<double>(state.topic_word(r, k, w)) + hp.beta) / den;
      }
    }
    phi.push_back(std::move(m));
  }
  return phi;
}

namespace {

void Accumulate(Matrix& acc, const Matrix& sample) {
  for (std::size_t r = 0; r < acc.rows(); ++r) {
    auto dst = acc.row(r);
    auto src = sample.row(r);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
}

// Row-normalizes in place; averaging normalized samples leaves rows summing
// to 1 up to rounding, this pins them to the simplex.
void AverageRows(Matrix& acc, std::size_t samples) {
  const double inv = 1.0 / static_cast<double>(samples);
  for (std::size_t r = 0; r < acc.rows(); ++r) {
    auto row = acc.row(r);
    double total = 0.0;
    for (auto& v : row) {
      v *= inv;
      total += v;
    }
    for (auto& v : row) v /= total;
  }
}

}  // namespace

StyleModel Train(const Corpus& corpus, const Hyperparams& hp, const TrainOptions& options) {
  hp.Check();
  // The sampler only ever sees documents and vocabularies; labels stay behind.
  ModelState state = ModelState::Initialize(corpus, hp);

  Matrix theta_acc(state.num_documents(), hp.num_topics);
  std::vector<Matrix> phi_acc;
  for (std::size_t r = 0; r < state.num_regions(); ++r) phi_acc.emplace_back(hp.num_topics, state.vocab_size(r));
  std::size_t samples = 0;

  for (std::size_t sweep = 1; sweep <= hp.sweeps; ++sweep) {
    GibbsSweep(state, hp);
    if (sweep > hp.burn_in && (sweep - hp.burn_in) % hp.sample_lag == 0) {
      Accumulate(theta_acc, EstimateTheta(state, hp));
      const auto phi = EstimatePhi(state, hp);
      for (std::size_t r = 0; r < phi.size(); ++r) Accumulate(phi_acc[r], phi[r]);
      ++samples;
    }
    if (options.progress_every > 0 && (sweep % options.progress_every == 0 || sweep == hp.sweeps)) {
      const double ll = LogLikelihood(state, hp);
      log::Info("sweep " + std::to_string(sweep) + "/" + std::to_string(hp.sweeps) +
                " log-likelihood " + std::to_string(ll));
      if (options.on_progress) options.on_progress(sweep, ll);
    }
  }
  if (samples == 0) {
    // burn_in + sample_lag overshoots the run; fall back to the final state.
    Accumulate(theta_acc, EstimateTheta(state, hp));
    const auto phi = EstimatePhi(state, hp);
    for (std::size_t r = 0; r < phi.size(); ++r) Accumulate(phi_acc[r], phi[r]);
    samples = 1;
  }
  AverageRows(theta_acc, samples);
  for (auto& m : phi_acc) AverageRows(m, samples);

  StyleModel model;
  model.hyperparams = hp;
  model.regions = corpus.regions;
  model.vocabularies = corpus.vocabularies;
  model.phi = std::move(phi_acc);
  model.theta_train = std::move(theta_acc);
  for (const auto& doc : corpus.documents) model.train_doc_ids.push_back(doc.id);
  model.provenance = {CorpusDigest(corpus), hp.sweeps, hp.seed, samples};
  return model;
}

}  // namespace stylefactor
