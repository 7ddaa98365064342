#include "stylefactor/synth.hpp"

#include <fstream>

#include "json.hpp"
#include "stylefactor/error.hpp"

namespace stylefactor {
namespace {

using nlohmann::json;

std::string TokenName(std::size_t w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "a%03zu", w);
  return buf;
}

std::size_t Argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

SyntheticCorpus SampleDocuments(const SynthSpec& spec, Rng& rng, std::vector<Matrix> phi,
                                const Matrix* fixed_theta) {
  const std::size_t num_docs = fixed_theta ? fixed_theta->rows() : spec.num_docs;
  CorpusBuilder builder(spec.regions);
  for (std::size_t r = 0; r < spec.regions.size(); ++r) {
    std::vector<std::string> tokens;
    for (std::size_t w = 0; w < spec.vocab_sizes[r]; ++w) tokens.push_back(TokenName(w));
    builder.DeclareVocabulary(spec.regions[r], tokens);
  }

  PlantedTruth truth;
  truth.theta = Matrix(num_docs, spec.k_true);
  truth.dominant.resize(num_docs);
  const int width = static_cast<int>(std::to_string(num_docs > 0 ? num_docs - 1 : 0).size());

  for (std::size_t d = 0; d < num_docs; ++d) {
    std::vector<double> theta;
    if (fixed_theta) {
      theta.assign(fixed_theta->row(d).begin(), fixed_theta->row(d).end());
    } else {
      theta = rng.Dirichlet(spec.k_true, spec.alpha_gen);
    }
    std::copy(theta.begin(), theta.end(), truth.theta.row(d).begin());
    truth.dominant[d] = Argmax(theta);

    char id[32];
    std::snprintf(id, sizeof(id), "doc%0*zu", width, d);
    std::vector<std::pair<std::string, std::vector<std::string>>> regions;
    for (std::size_t r = 0; r < spec.regions.size(); ++r) {
      const std::size_t n = spec.min_tokens + rng.UniformIndex(spec.max_tokens - spec.min_tokens + 1);
      std::vector<std::string> bag;
      bag.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t z = rng.Categorical(theta);
        const std::size_t w = rng.Categorical(phi[r].row(z));
        bag.push_back(TokenName(w));
      }
      regions.emplace_back(spec.regions[r], std::move(bag));
    }
    builder.AddDocument(id, regions);
    builder.SetLabel(id, StyleLabel(truth.dominant[d]));
    truth.doc_ids.emplace_back(id);
  }
  truth.phi = std::move(phi);
  return {std::move(builder).Build(), std::move(truth)};
}

}  // namespace

void SynthSpec::Check() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, "synth spec: " + what); };
  if (k_true < 1) fail("k_true must be >= 1");
  if (regions.empty()) fail("at least one region required");
  if (vocab_sizes.size() != regions.size()) fail("vocab_sizes must have one entry per region");
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (regions[r].empty()) fail("region names must be non-empty");
    if (vocab_sizes[r] < 1) fail("vocab size for '" + regions[r] + "' must be >= 1");
    for (std::size_t s = 0; s < r; ++s) {
      if (regions[s] == regions[r]) fail("duplicate region '" + regions[r] + "'");
    }
  }
  if (!(alpha_gen > 0.0)) fail("alpha_gen must be > 0");
  if (!(beta_gen > 0.0)) fail("beta_gen must be > 0");
  if (num_docs < 1) fail("num_docs must be >= 1");
  if (min_tokens < 1) fail("min_tokens must be >= 1");
  if (max_tokens < min_tokens) fail("max_tokens must be >= min_tokens");
}

std::vector<Matrix> SamplePlantedTopics(const SynthSpec& spec, Rng& rng) {
  std::vector<Matrix> phi;
  for (std::size_t r = 0; r < spec.regions.size(); ++r) {
    Matrix m(spec.k_true, spec.vocab_sizes[r]);
    for (std::size_t k = 0; k < spec.k_true; ++k) {
      const auto row = rng.Dirichlet(spec.vocab_sizes[r], spec.beta_gen);
      std::copy(row.begin(), row.end(), m.row(k).begin());
    }
    phi.push_back(std::move(m));
  }
  return phi;
}

SyntheticCorpus GenerateSynthetic(const SynthSpec& spec) {
  spec.Check();
  Rng rng(spec.seed);
  auto phi = SamplePlantedTopics(spec, rng);
  return SampleDocuments(spec, rng, std::move(phi), nullptr);
}

SyntheticCorpus GenerateWithMixtures(const SynthSpec& spec, const Matrix& mixtures) {
  spec.Check();
  if (mixtures.cols() != spec.k_true) {
    throw Error(ErrorKind::kInvalidArgument, "mixture matrix must have k_true columns");
  }
  if (mixtures.rows() == 0) throw Error(ErrorKind::kInvalidArgument, "mixture matrix is empty");
  for (std::size_t d = 0; d < mixtures.rows(); ++d) {
    double total = 0.0;
    for (double v : mixtures.row(d)) {
      if (v < 0.0) throw Error(ErrorKind::kInvalidArgument, "mixture weights must be non-negative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::kInvalidArgument, "mixture rows must sum to 1");
  }
  Rng rng(spec.seed);
  auto phi = SamplePlantedTopics(spec, rng);
  return SampleDocuments(spec, rng, std::move(phi), &mixtures);
}

std::string StyleLabel(std::size_t k) { return "style_" + std::to_string(k); }

void SaveTruth(const PlantedTruth& truth, const std::vector<std::string>& regions,
               const std::filesystem::path& path) {
  json j;
  j["doc_ids"] = truth.doc_ids;
  j["theta"] = truth.theta.ToRows();
  json phi = json::object();
  for (std::size_t r = 0; r < regions.size(); ++r) phi[regions[r]] = truth.phi[r].ToRows();
  j["phi"] = std::move(phi);
  j["regions"] = regions;
  j["dominant"] = truth.dominant;
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write truth file '" + path.string() + "'");
  out << j.dump() << '\n';
}

PlantedTruth LoadTruth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open truth file '" + path.string() + "'");
  try {
    const json j = json::parse(in);
    PlantedTruth truth;
    truth.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    truth.theta = Matrix::FromRows(j.at("theta").get<std::vector<std::vector<double>>>());
    for (const auto& region : j.at("regions")) {
      truth.phi.push_back(
          Matrix::FromRows(j.at("phi").at(region.get<std::string>()).get<std::vector<std::vector<double>>>()));
    }
    truth.dominant = j.at("dominant").get<std::vector<std::size_t>>();
    return truth;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, path.string() + ": " + e.what());
  }
}

std::filesystem::path TruthSidecarPath(const std::filesystem::path& corpus_path) {
  return corpus_path.string() + ".truth.json";
}

}  // namespace stylefactor
