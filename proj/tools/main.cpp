// stylefactor: batch jobs (synth, train, embed, eval) and read-only queries
// over trained artifacts. Query subcommands print exactly the payload the
// HTTP service returns for the same request.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stylefactor/api.hpp"
#include "stylefactor/embedding.hpp"
#include "stylefactor/eval.hpp"
#include "stylefactor/log.hpp"
#include "stylefactor/recovery.hpp"
#include "stylefactor/sampler.hpp"
#include "stylefactor/service.hpp"
#include "stylefactor/synth.hpp"

namespace fs = std::filesystem;
using namespace stylefactor;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void PrintError(const Error& e) { std::cerr << ErrorPayload(e) << std::flush; }

struct Artifacts {
  fs::path model;
  fs::path embeddings;
  fs::path corpus;

  void Bind(CLI::App* app) {
    app->add_option("--model", model, "Trained model JSON")->required();
    app->add_option("--embeddings", embeddings, "Embeddings JSONL produced under the model")->required();
    app->add_option("--corpus", corpus, "Corpus JSONL (document tokens for display)")->required();
  }
  StyleService Load() const { return StyleService::Load(model, embeddings, corpus); }
};

enum class MonoMode { kNone, kPrefixed, kGlobal };

MonoMode ParseMono(const std::string& s) {
  if (s == "none") return MonoMode::kNone;
  if (s == "prefixed") return MonoMode::kPrefixed;
  if (s == "global") return MonoMode::kGlobal;
  throw Error(ErrorKind::kInvalidArgument, "--mono must be none, prefixed or global, got '" + s + "'");
}

Corpus ApplyMono(Corpus corpus, MonoMode mode) {
  if (mode == MonoMode::kNone) return corpus;
  return FlattenToMono(corpus, mode == MonoMode::kPrefixed);
}

std::vector<double> ParseDoubles(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(',', pos);
    const auto piece = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kInvalidArgument, "cannot parse '" + piece + "' as a number in --theta");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::map<std::string, std::string> TruthLabels(const PlantedTruth& truth) {
  std::map<std::string, std::string> labels;
  for (std::size_t d = 0; d < truth.doc_ids.size(); ++d) labels[truth.doc_ids[d]] = StyleLabel(truth.dominant[d]);
  return labels;
}

void RequireCorpusMatchesModel(const StyleModel& model, const Corpus& corpus) {
  const auto digest = CorpusDigest(corpus);
  if (digest != model.provenance.corpus_digest) {
    throw Error(ErrorKind::kDigestMismatch, "model was trained on corpus " + model.provenance.corpus_digest +
                                                ", given corpus is " + digest);
  }
}

}  // namespace

int main(int argc, char** argv) {
  log::Configure();

  CLI::App app{"Style discovery with region-aware topic models"};
  app.require_subcommand(1);
  std::string log_level;
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error (overrides STYLEFACTOR_LOG)");
  std::uint64_t seed = 1;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted styles");
  SynthSpec spec;
  fs::path synth_out;
  std::optional<fs::path> truth_out;
  std::size_t vocab_size = 60;
  synth->add_option("--out", synth_out, "Corpus JSONL to write")->required();
  synth->add_option("--truth-out", truth_out, "Planted parameters (default <out>.truth.json)");
  synth->add_option("--k", spec.k_true, "Number of planted styles")->capture_default_str();
  synth->add_option("--docs", spec.num_docs, "Number of documents")->capture_default_str();
  synth->add_option("--regions", spec.regions, "Region names")->delimiter(',')->capture_default_str();
  synth->add_option("--vocab", vocab_size, "Vocabulary size of every region")->capture_default_str();
  synth->add_option("--alpha", spec.alpha_gen, "Dirichlet concentration of document mixtures")->capture_default_str();
  synth->add_option("--beta", spec.beta_gen, "Dirichlet concentration of planted topics")->capture_default_str();
  synth->add_option("--min-tokens", spec.min_tokens, "Minimum tokens per region")->capture_default_str();
  synth->add_option("--max-tokens", spec.max_tokens, "Maximum tokens per region")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Fit the topic model by collapsed Gibbs sampling");
  fs::path train_corpus, train_out;
  std::optional<fs::path> vocab_file;
  std::size_t K = 10;
  std::optional<double> alpha;
  Hyperparams hp;
  std::string mono_text = "none";
  train->add_option("--corpus", train_corpus, "Corpus JSONL")->required();
  train->add_option("--vocab-file", vocab_file, "Fixed per-region vocabularies (JSON object)");
  train->add_option("--out", train_out, "Model JSON to write")->required();
  train->add_option("--k", K, "Number of topics")->capture_default_str();
  train->add_option("--alpha", alpha, "Document-mixture prior (default 50/K)");
  train->add_option("--beta", hp.beta, "Topic-word prior")->capture_default_str();
  train->add_option("--sweeps", hp.sweeps, "Gibbs sweeps")->capture_default_str();
  train->add_option("--burn-in", hp.burn_in, "Sweeps before samples are averaged")->capture_default_str();
  train->add_option("--lag", hp.sample_lag, "Sweeps between averaged samples")->capture_default_str();
  train->add_option("--mono", mono_text, "none (region-aware), prefixed or global single-region baseline")
      ->capture_default_str();
  train->add_option("--seed", seed, "Random seed")->capture_default_str();

  // embed
  auto* embed = app.add_subcommand("embed", "Infer style mixtures for a corpus under a trained model");
  fs::path embed_model, embed_corpus, embed_out;
  FoldInParams fold;
  bool train_theta = false;
  std::size_t threads = 0;
  std::string embed_mono = "none";
  embed->add_option("--model", embed_model, "Model JSON")->required();
  embed->add_option("--corpus", embed_corpus, "Corpus JSONL")->required();
  embed->add_option("--out", embed_out, "Embeddings JSONL to write")->required();
  embed->add_flag("--train-theta", train_theta, "Use the training mixtures instead of fold-in inference");
  embed->add_option("--sweeps", fold.sweeps, "Fold-in sweeps")->capture_default_str();
  embed->add_option("--burn-in", fold.burn_in, "Fold-in burn-in")->capture_default_str();
  embed->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
  embed->add_option("--mono", embed_mono, "Flatten the corpus as the model was trained")->capture_default_str();
  embed->add_option("--seed", seed, "Random seed")->capture_default_str();

  // query subcommands
  Artifacts art;
  auto* styles = app.add_subcommand("styles", "Top tokens per region for every style");
  art.Bind(styles);
  std::size_t top_tokens = 10;
  styles->add_option("--top", top_tokens, "Tokens per region")->capture_default_str();

  auto* doc = app.add_subcommand("doc", "Tokens and mixture of one document");
  art.Bind(doc);
  std::string doc_id;
  doc->add_option("--id", doc_id, "Document id")->required();

  auto* retrieve = app.add_subcommand("retrieve", "Nearest documents to a query mixture");
  art.Bind(retrieve);
  RetrieveRequest rreq;
  std::string theta_text;
  auto* qid = retrieve->add_option("--query-id", rreq.query_id, "Query by a stored document");
  auto* qtheta = retrieve->add_option("--theta", theta_text, "Query mixture, comma separated");
  qid->excludes(qtheta);
  retrieve->add_option("--n", rreq.n, "Results")->capture_default_str();
  retrieve->add_option("--metric", rreq.metric, "hellinger|total-variation|jensen-shannon|euclidean")
      ->capture_default_str();

  auto* mix = app.add_subcommand("mix", "Documents strong in every selected style");
  art.Bind(mix);
  MixRequest mreq;
  mix->add_option("--styles", mreq.styles, "Style indices, comma separated")->delimiter(',')->required();
  mix->add_option("--n", mreq.n, "Results")->capture_default_str();

  auto* traverse = app.add_subcommand("traverse", "Rankings along a path from one style to another");
  art.Bind(traverse);
  TraverseRequest treq;
  traverse->add_option("--from", treq.from, "Source style")->required();
  traverse->add_option("--to", treq.to, "Target style")->required();
  traverse->add_option("--steps", treq.steps, "Steps including both ends")->capture_default_str();
  traverse->add_option("--n", treq.n, "Results per step")->capture_default_str();
  traverse->add_option("--metric", treq.metric, "Distance on the simplex")->capture_default_str();
  traverse->add_flag("--distinct", treq.distinct, "Never repeat a document across steps");

  auto* summarize = app.add_subcommand("summarize", "Style influence over the collection");
  art.Bind(summarize);
  SummaryRequest sreq;
  summarize->add_option("--top", sreq.top, "Styles to report")->capture_default_str();
  summarize->add_option("--exemplars", sreq.exemplars, "Exemplar documents per style")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Discovery and retrieval scores against ground truth");
  fs::path eval_corpus;
  std::optional<fs::path> eval_model, eval_embeddings, eval_truth, eval_out;
  std::string baseline = "none";
  std::size_t baseline_k = 0;
  std::size_t ndcg_n = 0;
  std::string eval_metric = "hellinger";
  std::string set_distance = "hamming";
  eval->add_option("--corpus", eval_corpus, "Corpus JSONL")->required();
  eval->add_option("--model", eval_model, "Model JSON");
  eval->add_option("--embeddings", eval_embeddings, "Embeddings JSONL (default: training mixtures of --model)");
  eval->add_option("--truth", eval_truth, "Planted truth JSON (default: corpus labels)");
  eval->add_option("--baseline", baseline, "none or kmeans (attribute indicators)")->capture_default_str();
  eval->add_option("--baseline-k", baseline_k, "Clusters for the baseline (default: number of labels)");
  eval->add_option("--ndcg", ndcg_n, "Also score retrieval at this depth (0 = off)")->capture_default_str();
  eval->add_option("--metric", eval_metric, "Retrieval distance")->capture_default_str();
  eval->add_option("--set-distance", set_distance, "hamming or jaccard")->capture_default_str();
  eval->add_option("--out", eval_out, "Also write the report here");
  eval->add_option("--seed", seed, "Random seed (baseline clustering)")->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "Read-only HTTP service over trained artifacts");
  art.Bind(serve);
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << ErrorPayload(Error(ErrorKind::kInvalidArgument, e.what())) << std::flush;
    return kExitUsage;
  }

  try {
    if (!log_level.empty()) log::SetLevel(log_level);

    if (*synth) {
      spec.seed = seed;
      spec.vocab_sizes.assign(spec.regions.size(), vocab_size);
      const auto generated = GenerateSynthetic(spec);
      SaveCorpus(generated.corpus, synth_out);
      const auto tpath = truth_out.value_or(TruthSidecarPath(synth_out));
      SaveTruth(generated.truth, spec.regions, tpath);
      nlohmann::ordered_json j = {{"corpus", synth_out.string()},
                                  {"truth", tpath.string()},
                                  {"digest", CorpusDigest(generated.corpus)}};
      std::cout << j.dump() << '\n';
    } else if (*train) {
      const auto corpus = ApplyMono(LoadCorpus(train_corpus, vocab_file), ParseMono(mono_text));
      Hyperparams h = Hyperparams::Defaults(K);
      h.alpha = alpha.value_or(h.alpha);
      h.beta = hp.beta;
      h.sweeps = hp.sweeps;
      h.burn_in = hp.burn_in;
      h.sample_lag = hp.sample_lag;
      h.seed = seed;
      const auto model = Train(corpus, h);
      SaveModel(model, train_out);
      nlohmann::ordered_json j = {{"model", train_out.string()},
                                  {"digest", ModelDigest(model)},
                                  {"samples", model.provenance.num_samples}};
      std::cout << j.dump() << '\n';
    } else if (*embed) {
      const auto model = LoadModel(embed_model);
      const auto corpus = LoadCorpus(embed_corpus);
      EmbeddedCollection collection;
      if (train_theta) {
        RequireCorpusMatchesModel(model, ApplyMono(corpus, ParseMono(embed_mono)));
        collection = TrainingCollection(model, corpus.labels);
      } else {
        fold.seed = seed;
        auto report = EmbedCorpus(model, ApplyMono(corpus, ParseMono(embed_mono)), fold, threads);
        for (const auto& [id, why] : report.failures) log::Warn("not embedded: " + id + ": " + why);
        collection = std::move(report.collection);
      }
      SaveEmbeddings(collection, embed_out);
      nlohmann::ordered_json j = {{"embeddings", embed_out.string()},
                                  {"documents", collection.size()},
                                  {"model_digest", collection.model_digest()}};
      std::cout << j.dump() << '\n';
    } else if (*styles) {
      std::cout << art.Load().Styles(top_tokens);
    } else if (*doc) {
      std::cout << art.Load().Document(doc_id);
    } else if (*retrieve) {
      if (!theta_text.empty()) rreq.theta = ParseDoubles(theta_text);
      std::cout << art.Load().Retrieve(rreq);
    } else if (*mix) {
      std::cout << art.Load().Mix(mreq);
    } else if (*traverse) {
      std::cout << art.Load().Traverse(treq);
    } else if (*summarize) {
      std::cout << art.Load().Summary(sreq);
    } else if (*eval) {
      const auto corpus = LoadCorpus(eval_corpus);
      std::optional<StyleModel> model;
      if (eval_model) model = LoadModel(*eval_model);
      std::optional<PlantedTruth> truth;
      if (eval_truth) truth = LoadTruth(*eval_truth);
      const auto labels = truth ? TruthLabels(*truth) : corpus.labels;
      if (labels.empty()) throw Error(ErrorKind::kInvalidArgument, "no ground truth: pass --truth or label the corpus");

      EvalReport report;
      if (baseline == "kmeans") {
        const auto indicators = AttributeIndicator(corpus);
        std::size_t k = baseline_k;
        if (k == 0) k = Partition::FromLabels(labels).DistinctLabels().size();
        const auto km = KMeans(indicators.values, k, seed);
        report = DiscoveryReport(Partition(indicators.ids, km.assignments), labels,
                                 {"attributes+kmeans", CorpusDigest(corpus), "", seed});
      } else if (baseline == "none") {
        EmbeddedCollection collection;
        if (eval_embeddings) {
          collection = LoadEmbeddings(*eval_embeddings);
          if (model && collection.model_digest() != ModelDigest(*model)) {
            throw Error(ErrorKind::kDigestMismatch, "embeddings were not produced by the given model");
          }
        } else if (model) {
          collection = TrainingCollection(*model);
        } else {
          throw Error(ErrorKind::kInvalidArgument, "eval needs --embeddings or --model");
        }
        report = DiscoveryReport(collection, labels,
                                 {"polylda", CorpusDigest(corpus), collection.model_digest(), seed});
        if (ndcg_n > 0) {
          Corpus scored = corpus;
          scored.labels = labels;
          AddRetrievalScores(report, collection, scored, ndcg_n, ParseSimplexMetric(eval_metric),
                             ParseSetDistance(set_distance));
        }
        if (model && truth && model->phi.size() == truth->phi.size() && model->num_topics() == truth->phi[0].rows()) {
          report.phi_mean_tv = GreedyMatchTopics(model->phi, truth->phi).mean_cost;
          report.region_alignment = RegionAlignmentRate(model->phi, truth->phi);
        }
      } else {
        throw Error(ErrorKind::kInvalidArgument, "--baseline must be none or kmeans, got '" + baseline + "'");
      }
      if (eval_out) SaveEvalReport(report, *eval_out);
      std::cout << report.ToJson() << '\n';
    } else if (*serve) {
      const auto service = art.Load();
      HttpServer server(service);
      server.Run(host, port);
    }
  } catch (const Error& e) {
    PrintError(e);
    return kExitFailure;
  } catch (const std::exception& e) {
    PrintError(Error(ErrorKind::kIo, e.what()));
    return kExitFailure;
  }
  return 0;
}
