#pragma once

// Reference computations that share no code with the library. They are
// deliberately naive (enumeration, chain-rule products, definitions).

#include <cstdint>
#include <string>
#include <vector>

#include "stylefactor/corpus.hpp"

namespace sftest {

/// Token stream of a corpus in the sampler's flat order: document by
/// document, region by region, then position.
struct FlatToken {
  std::size_t doc;
  std::size_t region;
  std::uint32_t word;
};
std::vector<FlatToken> FlattenTokens(const stylefactor::Corpus& corpus);

/// log p(words, z | alpha, beta) as the product of sequential Polya-urn
/// predictive probabilities (no Gamma functions involved).
double ChainRuleLogJoint(const stylefactor::Corpus& corpus, const std::vector<std::uint32_t>& z, std::size_t K,
                         double alpha, double beta);

/// Exact posterior over every z configuration. Configuration index is
/// sum_i z_i * K^i over flat tokens.
std::vector<double> EnumeratePosterior(const stylefactor::Corpus& corpus, std::size_t K, double alpha, double beta);

std::size_t ConfigIndex(const std::vector<std::uint32_t>& z, std::size_t K);
std::vector<std::uint32_t> ConfigFromIndex(std::size_t index, std::size_t n, std::size_t K);

/// Conditional of token `i` given all other assignments, by normalizing the
/// exact joint over token i's K values.
std::vector<double> BruteConditional(const stylefactor::Corpus& corpus, std::vector<std::uint32_t> z, std::size_t i,
                                     std::size_t K, double alpha, double beta);

double TotalVariation(const std::vector<double>& p, const std::vector<double>& q);

/// AP from its definition: a relevant item's precision counts every item
/// strictly ahead of it in (score desc, index asc) order.
double DefinitionAp(const std::vector<double>& scores, const std::vector<bool>& relevant);

/// NMI from a contingency table, geometric-mean normalization.
double ContingencyNmi(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace sftest
