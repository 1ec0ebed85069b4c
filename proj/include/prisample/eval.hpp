#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prisample/estimate.hpp"
#include "prisample/model.hpp"

namespace prisample {

// Maximum absolute difference between two right-continuous step CDFs,
// evaluated on the union of their breakpoints. Throws MalformedCurve if
// either curve is not monotone or does not end at q = 1.
double ks_statistic(std::span<const CdfPoint> est, std::span<const CdfPoint> truth);
double ks_statistic(const DistributionEstimate& est, const DistributionEstimate& truth);

// Mass curves are compared as r(q^-1(q)) on the union of both q grids,
// where q^-1(q) is the smallest step whose q reaches q.
double ks_statistic(std::span<const MassPoint> est, std::span<const MassPoint> truth);
double ks_statistic(const MassDistributionEstimate& est, const MassDistributionEstimate& truth);

// Diagnostic alternative: r compared as a step function of the quantile
// variable's value y (the mass-weighted CDF), ignoring the q axis. Not used
// by run_eval.
double mass_ks_by_value(std::span<const MassPoint> est, std::span<const MassPoint> truth);

// (truth r, estimated r) on the union q grid, for quantile-quantile plots.
std::vector<std::pair<double, double>> qq_curve(const MassDistributionEstimate& est,
                                                const MassDistributionEstimate& truth);

// A distribution to estimate: the ordinary distribution of `variable`, or
// when `by` is set, the mass distribution of `variable` by quantiles of `by`.
struct EvalTarget {
  std::string variable;
  std::optional<std::string> by;

  bool is_mass() const noexcept { return by.has_value(); }
  bool operator==(const EvalTarget&) const = default;
};

struct EvalSpec {
  std::string dataset;
  std::vector<WeightSpec> weights;
  std::vector<EvalTarget> targets;
  std::size_t runs = 100;
  std::size_t k = 1000;
  std::uint64_t base_seed = 0;
  // 0 picks the hardware concurrency. Results do not depend on it.
  std::size_t threads = 1;

  // Throws InvalidArgument unless runs >= 1, k >= 2 and both lists are
  // nonempty.
  void validate() const;
};

// Weightings {uniform, fo, fr, ac}; ordinary distributions of fo, fr, ac;
// mass distributions of each of them by quantiles of each.
EvalSpec node_eval_spec(std::size_t runs, std::size_t k, std::uint64_t base_seed);

// Weightings {uniform, fo1, fo2, ffan}; ordinary distribution of ffan;
// mass of ffan by quantiles of fo1, fo2, ffan.
EvalSpec link_eval_spec(std::size_t runs, std::size_t k, std::uint64_t base_seed);

struct KsCell {
  WeightSpec weight;
  EvalTarget target;
  double median_ks = 0.0;
  std::vector<double> per_run;  // per_run[r] belongs to seed base_seed + r + 1
};

struct KsTable {
  std::string dataset;
  std::size_t runs = 0;
  std::size_t k = 0;
  std::uint64_t base_seed = 0;
  std::vector<KsCell> cells;  // weight-major, in spec order

  // Throws InvalidArgument if absent.
  const KsCell& at(const WeightSpec& weight, const EvalTarget& target) const;
};

double median(std::vector<double> values);

// For each run r = 1..runs and weighting w: master with seed base_seed + r,
// k items played out under `true`, KS of each target estimate against the
// exact curve of `records`.
KsTable run_eval(std::span<const Record> records, const EvalSpec& spec);

void write_table_text(std::ostream& out, const KsTable& table);
void write_table_rows(std::ostream& out, const KsTable& table);
void write_table_raw(std::ostream& out, const KsTable& table);
void write_qq(std::ostream& out, std::span<const std::pair<double, double>> points);

}  // namespace prisample
