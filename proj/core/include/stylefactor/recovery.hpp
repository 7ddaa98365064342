#pragma once

#include <span>
#include <vector>

#include "stylefactor/corpus.hpp"
#include "stylefactor/matrix.hpp"

namespace stylefactor {

// Comparisons between learned and planted topics on synthetic corpora.

/// sum_w min(p_w, q_w); 1 for identical distributions, 0 for disjoint supports.
double Overlap(std::span<const double> p, std::span<const double> q);

struct TopicMatching {
  std::vector<int> learned_to_planted;  // -1 when a learned topic stays unmatched
  std::vector<double> cost;             // per learned topic, mean TV across regions (or NaN)
  double mean_cost = 0.0;               // over matched pairs
};

/// Greedy one-to-one matching: repeatedly pairs the unmatched (learned,
/// planted) topics with the smallest region-averaged total-variation distance.
TopicMatching GreedyMatchTopics(const std::vector<Matrix>& learned, const std::vector<Matrix>& planted);

/// Fraction of learned topics whose per-region greedy matches point at the
/// same planted style in every region. `learned[r]` is K x V_r; topics of
/// different regions are compared by row index.
double RegionAlignmentRate(const std::vector<Matrix>& learned, const std::vector<Matrix>& planted);

/// Documents restricted to one region (documents with no tokens there are dropped).
Corpus ProjectToRegion(const Corpus& corpus, std::size_t region);

}  // namespace stylefactor
