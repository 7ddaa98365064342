#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stylefactor {

enum class SimplexMetric { kHellinger, kTotalVariation, kJensenShannon, kEuclidean };

/// Parses "hellinger", "total-variation" (or "tv"), "jensen-shannon" (or
/// "js"), "euclidean". Throws Error(kInvalidArgument) otherwise.
SimplexMetric ParseSimplexMetric(std::string_view name);
std::string_view SimplexMetricName(SimplexMetric metric);
const std::vector<SimplexMetric>& AllSimplexMetrics();

double HellingerDistance(std::span<const double> p, std::span<const double> q);
double TotalVariationDistance(std::span<const double> p, std::span<const double> q);
/// Square root of the base-2 Jensen-Shannon divergence; lies in [0, 1].
double JensenShannonDistance(std::span<const double> p, std::span<const double> q);
double EuclideanDistance(std::span<const double> p, std::span<const double> q);

double Distance(SimplexMetric metric, std::span<const double> p, std::span<const double> q);

/// Throws Error(kInvalidArgument) unless v is non-negative and sums to 1 within tol.
void RequireOnSimplex(std::span<const double> v, double tol = 1e-6);

}  // namespace stylefactor
