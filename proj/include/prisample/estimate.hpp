#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "prisample/playout.hpp"
#include "prisample/predicate.hpp"

namespace prisample {

// Horvitz-Thompson estimation over a played-out sample. Each sampled item
// contributes its value divided by its inclusion probability
// p_i = min(1, w_i / z).

struct CdfPoint {
  double y = 0.0;
  double q = 0.0;

  bool operator==(const CdfPoint&) const = default;
};

struct MassPoint {
  double y = 0.0;  // value of the quantile variable at this step
  double q = 0.0;
  double r = 0.0;

  bool operator==(const MassPoint&) const = default;
};

// Estimated ordinary distribution: q(y) is the estimated share of records
// with variable <= y, at each distinct sampled y (ascending).
struct DistributionEstimate {
  std::string variable;
  std::vector<CdfPoint> points;
  std::string weight;  // weight spec text, or "population" for exact curves
  std::size_t k = 0;
  double threshold = 0.0;
};

// Estimated mass distribution of `mass_variable` by quantiles of
// `quantile_variable`: at each distinct y of the quantile variable, q is the
// share of records with quantile variable <= y and r the share of the
// total mass they hold.
struct MassDistributionEstimate {
  std::string mass_variable;
  std::string quantile_variable;
  std::vector<MassPoint> points;
  std::string weight;
  std::size_t k = 0;
  double threshold = 0.0;
};

double subset_sum(const SampleResult& sample, std::string_view feature,
                  const Predicate& pred = Predicate::always());
double subset_count(const SampleResult& sample, const Predicate& pred = Predicate::always());

// Throws EmptySample, MissingFeature.
DistributionEstimate ordinary_cdf(const SampleResult& sample, std::string_view variable);

// Throws EmptySample, MissingFeature, InvalidArgument (zero estimated mass).
MassDistributionEstimate mass_distribution(const SampleResult& sample,
                                           std::string_view mass_variable,
                                           std::string_view quantile_variable);

// Keeps entries matching `pred`; threshold, mode and cursor are untouched
// since they belong to the draw, not the filter.
SampleResult restrict(const SampleResult& sample, const Predicate& pred);

void write_estimate(std::ostream& out, const DistributionEstimate& est);
void write_estimate(std::ostream& out, const MassDistributionEstimate& est);

}  // namespace prisample
