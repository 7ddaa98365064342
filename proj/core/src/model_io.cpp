#include <fstream>
#include <sstream>

#include "json.hpp"
#include "stylefactor/error.hpp"
#include "stylefactor/sampler.hpp"

namespace stylefactor {
namespace {

using json = nlohmann::ordered_json;

void CheckStochasticRows(const Matrix& m, const std::string& what) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double total = 0.0;
    for (double v : m.row(r)) {
      if (!(v >= 0.0)) throw Error(ErrorKind::kSchema, what + " has a negative or NaN entry");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::kSchema, what + " row does not sum to 1");
  }
}

}  // namespace

std::string ModelToJson(const StyleModel& model) {
  json j;
  j["version"] = kModelFormatVersion;
  const auto& hp = model.hyperparams;
  j["hyperparams"] = {{"K", hp.num_topics},         {"alpha", hp.alpha},
                      {"beta", hp.beta},            {"sweeps", hp.sweeps},
                      {"burn_in", hp.burn_in},      {"sample_lag", hp.sample_lag},
                      {"seed", hp.seed}};
  j["regions"] = model.regions;
  json vocab = json::object();
  json phi = json::object();
  for (std::size_t r = 0; r < model.regions.size(); ++r) {
    vocab[model.regions[r]] = model.vocabularies[r].tokens();
    phi[model.regions[r]] = model.phi[r].ToRows();
  }
  j["vocab"] = std::move(vocab);
  j["phi"] = std::move(phi);
  j["theta_train"] = model.theta_train.ToRows();
  j["train_doc_ids"] = model.train_doc_ids;
  j["provenance"] = {{"corpus_digest", model.provenance.corpus_digest},
                     {"sweeps", model.provenance.sweeps},
                     {"seed", model.provenance.seed},
                     {"num_samples", model.provenance.num_samples}};
  return j.dump();
}

StyleModel ModelFromJson(std::string_view text, std::string_view source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kSchema, std::string(source) + ": not valid JSON: " + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("version")) {
      throw Error(ErrorKind::kSchema, std::string(source) + ": missing 'version'");
    }
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorKind::kVersionMismatch, std::string(source) + ": model format version " +
                                                   std::to_string(version) + ", expected " +
                                                   std::to_string(kModelFormatVersion));
    }
    StyleModel m;
    const auto& h = j.at("hyperparams");
    m.hyperparams.num_topics = h.at("K").get<std::size_t>();
    m.hyperparams.alpha = h.at("alpha").get<double>();
    m.hyperparams.beta = h.at("beta").get<double>();
    m.hyperparams.sweeps = h.at("sweeps").get<std::size_t>();
    m.hyperparams.burn_in = h.at("burn_in").get<std::size_t>();
    m.hyperparams.sample_lag = h.at("sample_lag").get<std::size_t>();
    m.hyperparams.seed = h.at("seed").get<std::uint64_t>();
    m.hyperparams.Check();

    m.regions = j.at("regions").get<std::vector<std::string>>();
    const std::size_t K = m.hyperparams.num_topics;
    for (const auto& region : m.regions) {
      Vocabulary v(region);
      for (const auto& tok : j.at("vocab").at(region)) v.Add(tok.get<std::string>());
      const auto rows = j.at("phi").at(region).get<std::vector<std::vector<double>>>();
      if (rows.size() != K) throw Error(ErrorKind::kSchema, std::string(source) + ": phi has wrong topic count");
      for (const auto& row : rows) {
        if (row.size() != v.size()) {
          throw Error(ErrorKind::kSchema, std::string(source) + ": phi row width != vocabulary size");
        }
      }
      Matrix phi = Matrix::FromRows(rows);
      CheckStochasticRows(phi, "phi[" + region + "]");
      m.vocabularies.push_back(std::move(v));
      m.phi.push_back(std::move(phi));
    }
    const auto theta = j.at("theta_train").get<std::vector<std::vector<double>>>();
    for (const auto& row : theta) {
      if (row.size() != K) throw Error(ErrorKind::kSchema, std::string(source) + ": theta_train row width != K");
    }
    m.theta_train = theta.empty() ? Matrix(0, K) : Matrix::FromRows(theta);
    CheckStochasticRows(m.theta_train, "theta_train");
    m.train_doc_ids = j.at("train_doc_ids").get<std::vector<std::string>>();
    if (m.train_doc_ids.size() != m.theta_train.rows()) {
      throw Error(ErrorKind::kSchema, std::string(source) + ": train_doc_ids does not match theta_train");
    }
    const auto& p = j.at("provenance");
    m.provenance.corpus_digest = p.at("corpus_digest").get<std::string>();
    m.provenance.sweeps = p.at("sweeps").get<std::size_t>();
    m.provenance.seed = p.at("seed").get<std::uint64_t>();
    m.provenance.num_samples = p.at("num_samples").get<std::size_t>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string(source) + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidArgument) throw Error(ErrorKind::kSchema, e.what());
    throw;
  }
}

void SaveModel(const StyleModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write model file '" + path.string() + "'");
  out << ModelToJson(model) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

StyleModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open model file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return ModelFromJson(buf.str(), path.string());
}

std::string ModelDigest(const StyleModel& model) { return HexDigest(Fnv1a64(ModelToJson(model))); }

}  // namespace stylefactor
