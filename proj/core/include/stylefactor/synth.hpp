#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stylefactor/corpus.hpp"
#include "stylefactor/matrix.hpp"
#include "stylefactor/rng.hpp"

namespace stylefactor {

/// Parameters of the forward sampler for the region-tuple generative process.
struct SynthSpec {
  std::size_t k_true = 5;
  std::vector<std::string> regions = {"outer", "upper", "lower"};
  std::vector<std::size_t> vocab_sizes = {60, 60, 60};
  double alpha_gen = 0.1;
  double beta_gen = 0.01;
  std::size_t num_docs = 500;
  std::size_t min_tokens = 8;  // per region, inclusive
  std::size_t max_tokens = 20;
  std::uint64_t seed = 1;

  /// Throws Error(kInvalidArgument) naming the first bad field.
  void Check() const;
};

/// Parameters the corpus was drawn from.
struct PlantedTruth {
  std::vector<std::string> doc_ids;
  Matrix theta;              // M x K_true
  std::vector<Matrix> phi;   // per region, K_true x V_r
  std::vector<std::size_t> dominant;  // argmax of each planted theta row

  friend bool operator==(const PlantedTruth&, const PlantedTruth&) = default;
};

struct SyntheticCorpus {
  Corpus corpus;  // labels hold the dominant planted style as "style_<k>"
  PlantedTruth truth;
};

/// Samples topics phi_k^(r) ~ Dir(beta_gen), then per document
/// theta ~ Dir(alpha_gen) and each token topic-then-word.
SyntheticCorpus GenerateSynthetic(const SynthSpec& spec);

/// Same process with document mixtures supplied instead of drawn; one
/// document per row of `mixtures` (spec.num_docs is ignored).
SyntheticCorpus GenerateWithMixtures(const SynthSpec& spec, const Matrix& mixtures);

/// Planted topic-word distributions only, drawn exactly as GenerateSynthetic does.
std::vector<Matrix> SamplePlantedTopics(const SynthSpec& spec, Rng& rng);

std::string StyleLabel(std::size_t k);

void SaveTruth(const PlantedTruth& truth, const std::vector<std::string>& regions,
               const std::filesystem::path& path);
PlantedTruth LoadTruth(const std::filesystem::path& path);

/// "<corpus>.truth.json" next to the corpus file.
std::filesystem::path TruthSidecarPath(const std::filesystem::path& corpus_path);

}  // namespace stylefactor
