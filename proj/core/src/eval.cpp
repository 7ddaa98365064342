#include "stylefactor/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "stylefactor/error.hpp"
#include "stylefactor/log.hpp"

namespace stylefactor {
namespace {

double DcgAt(const std::vector<bool>& gains, std::size_t n) {
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(n, gains.size()); ++i) {
    if (gains[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

double NdcgFromGains(const std::vector<bool>& gains, std::size_t total_relevant, std::size_t n) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "NDCG depth must be >= 1");
  if (total_relevant == 0) {
    log::Warn("NDCG query has no relevant documents; scoring 0");
    return 0.0;
  }
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(n, total_relevant); ++i) ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return DcgAt(gains, n) / ideal;
}

std::vector<int> AlignedLabels(const Partition& truth, const std::vector<std::string>& ids) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto l = truth.LabelOf(id);
    if (!l) throw Error(ErrorKind::kInvalidArgument, "document '" + id + "' has no ground-truth label");
    out.push_back(*l);
  }
  return out;
}

}  // namespace

Partition::Partition(std::vector<std::string> ids, std::vector<int> labels)
    : ids_(std::move(ids)), labels_(std::move(labels)) {
  if (ids_.size() != labels_.size()) throw Error(ErrorKind::kInvalidArgument, "partition ids/labels size mismatch");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], labels_[i]).second) {
      throw Error(ErrorKind::kInvalidArgument, "document '" + ids_[i] + "' labeled more than once");
    }
  }
}

Partition Partition::FromLabels(const std::map<std::string, std::string>& labels) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : labels) ids.push_back(id);
  return FromLabels(labels, ids);
}

Partition Partition::FromLabels(const std::map<std::string, std::string>& labels,
                                const std::vector<std::string>& ids) {
  std::set<std::string> names;
  for (const auto& id : ids) {
    auto it = labels.find(id);
    if (it == labels.end()) throw Error(ErrorKind::kInvalidArgument, "document '" + id + "' has no label");
    names.insert(it->second);
  }
  std::vector<std::string> name_list(names.begin(), names.end());
  std::vector<int> out;
  for (const auto& id : ids) {
    const auto& name = labels.at(id);
    out.push_back(static_cast<int>(std::lower_bound(name_list.begin(), name_list.end(), name) - name_list.begin()));
  }
  Partition p(ids, std::move(out));
  p.names_ = std::move(name_list);
  return p;
}

Partition Partition::DominantTopic(const std::vector<std::string>& ids, const Matrix& theta) {
  if (ids.size() != theta.rows()) throw Error(ErrorKind::kInvalidArgument, "ids do not match theta rows");
  std::vector<int> labels;
  for (std::size_t d = 0; d < theta.rows(); ++d) {
    const auto row = theta.row(d);
    labels.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return Partition(ids, std::move(labels));
}

std::optional<int> Partition::LabelOf(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Partition::DistinctLabels() const {
  std::set<int> s(labels_.begin(), labels_.end());
  return {s.begin(), s.end()};
}

double Nmi(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kInvalidArgument, "NMI over different document sets");
  if (a.size() == 0) throw Error(ErrorKind::kInvalidArgument, "NMI of empty partitions");
  std::map<std::pair<int, int>, std::size_t> joint;
  std::map<int, std::size_t> ca;
  std::map<int, std::size_t> cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto lb = b.LabelOf(a.ids()[i]);
    if (!lb) throw Error(ErrorKind::kInvalidArgument, "document '" + a.ids()[i] + "' missing from second partition");
    const int la = a.labels()[i];
    ++joint[{la, *lb}];
    ++ca[la];
    ++cb[*lb];
  }
  const double n = static_cast<double>(a.size());
  auto entropy = [n](const std::map<int, std::size_t>& counts) {
    double h = 0.0;
    for (const auto& [_, c] : counts) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
    return h;
  };
  const double ha = entropy(ca);
  const double hb = entropy(cb);
  if (ca.size() == 1 || cb.size() == 1) return (ca.size() == 1 && cb.size() == 1) ? 1.0 : 0.0;
  double mi = 0.0;
  for (const auto& [cell, c] : joint) {
    const double pij = static_cast<double>(c) / n;
    const double pi = static_cast<double>(ca[cell.first]) / n;
    const double pj = static_cast<double>(cb[cell.second]) / n;
    mi += pij * std::log(pij / (pi * pj));
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

double AveragePrecision(std::span<const double> scores, const std::vector<bool>& relevant,
                        std::span<const std::string> ids) {
  if (scores.size() != relevant.size()) throw Error(ErrorKind::kInvalidArgument, "scores/relevance size mismatch");
  if (!ids.empty() && ids.size() != scores.size()) throw Error(ErrorKind::kInvalidArgument, "ids size mismatch");
  const auto total = static_cast<std::size_t>(std::count(relevant.begin(), relevant.end(), true));
  if (total == 0) throw Error(ErrorKind::kInvalidArgument, "average precision needs at least one relevant document");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids.empty() ? a < b : ids[a] < ids[b];
  });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!relevant[order[rank]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    if (hits == total) break;
  }
  return sum / static_cast<double>(total);
}

MaxApResult AvgMaxAp(const std::vector<std::string>& ids, const Matrix& theta, const Partition& truth) {
  if (ids.size() != theta.rows()) throw Error(ErrorKind::kInvalidArgument, "ids do not match theta rows");
  if (ids.empty()) throw Error(ErrorKind::kInvalidArgument, "avg-max-AP of an empty collection");
  const auto labels = AlignedLabels(truth, ids);
  const std::set<int> styles(labels.begin(), labels.end());
  MaxApResult out;
  std::vector<double> column(theta.rows());
  for (int s : styles) {
    std::vector<bool> relevant(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) relevant[i] = labels[i] == s;
    StyleAp best{s, "", 0, -1.0};
    if (static_cast<std::size_t>(s) < truth.label_names().size() && s >= 0) best.name = truth.label_names()[s];
    for (std::size_t k = 0; k < theta.cols(); ++k) {
      for (std::size_t i = 0; i < theta.rows(); ++i) column[i] = theta(i, k);
      const double ap = AveragePrecision(column, relevant, ids);
      if (ap > best.ap) {
        best.ap = ap;
        best.best_topic = k;
      }
    }
    out.per_style.push_back(best);
    out.mean += best.ap;
  }
  out.mean /= static_cast<double>(out.per_style.size());
  return out;
}

double Ndcg(std::span<const std::string> ranking, const Partition& truth, int query_label, std::size_t n) {
  std::vector<bool> gains;
  gains.reserve(ranking.size());
  for (const auto& id : ranking) {
    const auto l = truth.LabelOf(id);
    gains.push_back(l && *l == query_label);
  }
  const auto total = static_cast<std::size_t>(std::count(truth.labels().begin(), truth.labels().end(), query_label));
  return NdcgFromGains(gains, total, n);
}

IndicatorMatrix AttributeIndicator(const Corpus& corpus) {
  const Corpus flat = FlattenToMono(corpus, /*prefix_regions=*/true);
  IndicatorMatrix out;
  out.features = flat.vocabularies.front().tokens();
  out.values = Matrix(flat.num_documents(), out.features.size());
  for (std::size_t d = 0; d < flat.num_documents(); ++d) {
    out.ids.push_back(flat.documents[d].id);
    for (TokenId w : flat.documents[d].tokens_by_region.front()) out.values(d, w) = 1.0;
  }
  return out;
}

SetDistance ParseSetDistance(std::string_view name) {
  if (name == "hamming") return SetDistance::kHamming;
  if (name == "jaccard") return SetDistance::kJaccard;
  throw Error(ErrorKind::kInvalidArgument, "unknown set distance '" + std::string(name) + "'");
}

double IndicatorDistance(SetDistance distance, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kInvalidArgument, "indicator vectors of unequal length");
  std::size_t diff = 0;
  std::size_t both = 0;
  std::size_t either = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0.0;
    const bool y = b[i] != 0.0;
    diff += x != y;
    both += x && y;
    either += x || y;
  }
  if (distance == SetDistance::kHamming) return static_cast<double>(diff);
  return either == 0 ? 0.0 : 1.0 - static_cast<double>(both) / static_cast<double>(either);
}

DiversityNovelty ComputeDiversityNovelty(const IndicatorMatrix& indicators, const RankedResult& results,
                                         const std::string& query_id, SetDistance distance) {
  if (results.entries.empty()) throw Error(ErrorKind::kInvalidArgument, "diversity of an empty result list");
  std::map<std::string_view, std::size_t> row;
  for (std::size_t i = 0; i < indicators.ids.size(); ++i) row.emplace(indicators.ids[i], i);
  auto lookup = [&](const std::string& id) {
    auto it = row.find(id);
    if (it == row.end()) throw Error(ErrorKind::kNotFound, "no indicator vector for document '" + id + "'");
    return indicators.values.row(it->second);
  };
  const auto query = lookup(query_id);
  std::vector<std::span<const double>> vecs;
  for (const auto& e : results.entries) vecs.push_back(lookup(e.id));

  DiversityNovelty out;
  // Mean over all ordered pairs (self-pairs contribute 0), so repeating the
  // whole result list leaves diversity unchanged.
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    for (std::size_t j = i + 1; j < vecs.size(); ++j) out.diversity += 2.0 * IndicatorDistance(distance, vecs[i], vecs[j]);
    out.novelty += IndicatorDistance(distance, vecs[i], query);
  }
  const double n = static_cast<double>(vecs.size());
  out.diversity /= n * n;
  out.novelty /= n;
  return out;
}

std::string EvalReport::ToJson() const {
  nlohmann::ordered_json j;
  j["nmi"] = nmi;
  j["avg_max_ap"] = avg_max_ap;
  auto& styles = j["per_style"] = nlohmann::ordered_json::array();
  for (const auto& s : per_style) {
    styles.push_back({{"label", s.label}, {"name", s.name}, {"best_topic", s.best_topic}, {"ap", s.ap}});
  }
  if (ndcg) j["ndcg"] = *ndcg;
  if (ndcg_depth) j["ndcg_depth"] = *ndcg_depth;
  if (diversity) j["diversity"] = *diversity;
  if (novelty) j["novelty"] = *novelty;
  if (phi_mean_tv) j["phi_mean_tv"] = *phi_mean_tv;
  if (region_alignment) j["region_alignment"] = *region_alignment;
  j["provenance"] = {{"method", provenance.method},
                     {"corpus_digest", provenance.corpus_digest},
                     {"model_digest", provenance.model_digest},
                     {"seed", provenance.seed}};
  return j.dump();
}

EvalReport EvalReport::FromJson(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.nmi = j.at("nmi").get<double>();
    r.avg_max_ap = j.at("avg_max_ap").get<double>();
    for (const auto& s : j.at("per_style")) {
      r.per_style.push_back({s.at("label").get<int>(), s.at("name").get<std::string>(),
                             s.at("best_topic").get<std::size_t>(), s.at("ap").get<double>()});
    }
    if (j.contains("ndcg")) r.ndcg = j["ndcg"].get<double>();
    if (j.contains("ndcg_depth")) r.ndcg_depth = j["ndcg_depth"].get<std::size_t>();
    if (j.contains("diversity")) r.diversity = j["diversity"].get<double>();
    if (j.contains("novelty")) r.novelty = j["novelty"].get<double>();
    if (j.contains("phi_mean_tv")) r.phi_mean_tv = j["phi_mean_tv"].get<double>();
    if (j.contains("region_alignment")) r.region_alignment = j["region_alignment"].get<double>();
    const auto& p = j.at("provenance");
    r.provenance = {p.at("method").get<std::string>(), p.at("corpus_digest").get<std::string>(),
                    p.at("model_digest").get<std::string>(), p.at("seed").get<std::uint64_t>()};
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed eval report: ") + e.what());
  }
}

EvalReport DiscoveryReport(const EmbeddedCollection& collection, const std::map<std::string, std::string>& labels,
                           EvalProvenance provenance) {
  if (labels.empty()) throw Error(ErrorKind::kInvalidArgument, "discovery report needs ground-truth labels");
  const auto ids = collection.Ids();
  const Partition truth = Partition::FromLabels(labels, ids);
  const Matrix theta = collection.ThetaMatrix();
  EvalReport r;
  r.nmi = Nmi(Partition::DominantTopic(ids, theta), truth);
  auto ap = AvgMaxAp(ids, theta, truth);
  r.avg_max_ap = ap.mean;
  r.per_style = std::move(ap.per_style);
  if (provenance.model_digest.empty()) provenance.model_digest = collection.model_digest();
  r.provenance = std::move(provenance);
  return r;
}

EvalReport DiscoveryReport(const Partition& clustering, const std::map<std::string, std::string>& labels,
                           EvalProvenance provenance) {
  if (labels.empty()) throw Error(ErrorKind::kInvalidArgument, "discovery report needs ground-truth labels");
  const auto& ids = clustering.ids();
  const Partition truth = Partition::FromLabels(labels, ids);
  const auto clusters = clustering.DistinctLabels();
  Matrix onehot(ids.size(), clusters.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto c = std::lower_bound(clusters.begin(), clusters.end(), clustering.labels()[i]) - clusters.begin();
    onehot(i, static_cast<std::size_t>(c)) = 1.0;
  }
  EvalReport r;
  r.nmi = Nmi(clustering, truth);
  auto ap = AvgMaxAp(ids, onehot, truth);
  r.avg_max_ap = ap.mean;
  r.per_style = std::move(ap.per_style);
  r.provenance = std::move(provenance);
  return r;
}

void AddRetrievalScores(EvalReport& report, const EmbeddedCollection& collection, const Corpus& corpus,
                        std::size_t n, SimplexMetric metric, SetDistance distance) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "retrieval depth must be >= 1");
  const IndicatorMatrix indicators = AttributeIndicator(corpus);
  std::map<std::string, std::size_t> per_label;
  for (const auto& e : collection.embeddings()) {
    if (auto it = corpus.labels.find(e.doc_id); it != corpus.labels.end()) ++per_label[it->second];
  }
  double ndcg_sum = 0.0;
  double div_sum = 0.0;
  double nov_sum = 0.0;
  std::size_t queries = 0;
  for (const auto& q : collection.embeddings()) {
    auto label = corpus.labels.find(q.doc_id);
    if (label == corpus.labels.end()) continue;
    const auto results = Retrieve(collection, q.theta, n, metric, q.doc_id);
    if (results.entries.empty()) continue;
    std::vector<bool> gains;
    for (const auto& e : results.entries) {
      auto it = corpus.labels.find(e.id);
      gains.push_back(it != corpus.labels.end() && it->second == label->second);
    }
    ndcg_sum += NdcgFromGains(gains, per_label[label->second] - 1, n);
    const auto dn = ComputeDiversityNovelty(indicators, results, q.doc_id, distance);
    div_sum += dn.diversity;
    nov_sum += dn.novelty;
    ++queries;
  }
  if (queries == 0) throw Error(ErrorKind::kInvalidArgument, "no labeled documents to use as retrieval queries");
  report.ndcg = ndcg_sum / static_cast<double>(queries);
  report.ndcg_depth = n;
  report.diversity = div_sum / static_cast<double>(queries);
  report.novelty = nov_sum / static_cast<double>(queries);
}

void SaveEvalReport(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write report '" + path.string() + "'");
  out << report.ToJson() << '\n';
}

}  // namespace stylefactor
