#include "prisample/estimate.hpp"

#include <algorithm>
#include <ostream>

#include "prisample/error.hpp"
#include "prisample/numeric.hpp"

namespace prisample {

namespace {

// Only a zero-weight item sampled under z > 0 could have p = 0, which a
// consistent sample never contains.
double checked_inclusion(const SampleEntry& e, double z) {
  const double p = inclusion_prob(e.weight, z);
  if (!(p > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "entry '" + e.id + "' has zero inclusion probability (weight 0 with z > 0)");
  }
  return p;
}

struct Term {
  double y;
  const std::string* id;
  double count;  // 1 / p
  double mass;   // x / p
};

// Terms sorted by (y, id) so that the accumulation order, and therefore the
// rounding, depends only on the sampled set.
std::vector<Term> sorted_terms(const SampleResult& sample, std::string_view variable,
                               std::string_view mass_variable) {
  if (sample.entries.empty()) {
    throw Error(ErrorCode::EmptySample, "distribution estimate needs a nonempty sample");
  }
  std::vector<Term> terms;
  terms.reserve(sample.entries.size());
  for (const auto& e : sample.entries) {
    const double p = checked_inclusion(e, sample.threshold);
    const double x = mass_variable.empty() ? 0.0 : e.features.at(mass_variable);
    terms.push_back({e.features.at(variable), &e.id, 1.0 / p, x / p});
  }
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    if (a.y != b.y) return a.y < b.y;
    return *a.id < *b.id;
  });
  return terms;
}

}  // namespace

double subset_sum(const SampleResult& sample, std::string_view feature, const Predicate& pred) {
  CompensatedSum sum;
  for (const auto& e : sample.entries) {
    if (!pred.evaluate(e.features)) continue;
    sum += e.features.at(feature) / checked_inclusion(e, sample.threshold);
  }
  return sum.value();
}

double subset_count(const SampleResult& sample, const Predicate& pred) {
  CompensatedSum sum;
  for (const auto& e : sample.entries) {
    if (!pred.evaluate(e.features)) continue;
    sum += 1.0 / checked_inclusion(e, sample.threshold);
  }
  return sum.value();
}

DistributionEstimate ordinary_cdf(const SampleResult& sample, std::string_view variable) {
  const auto terms = sorted_terms(sample, variable, {});

  std::vector<std::pair<double, double>> steps;  // (y, cumulative count)
  CompensatedSum count;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    count += terms[i].count;
    if (i + 1 == terms.size() || terms[i + 1].y != terms[i].y) {
      steps.emplace_back(terms[i].y, count.value());
    }
  }
  const double total = steps.back().second;

  DistributionEstimate est;
  est.variable = std::string(variable);
  est.weight = sample.weight_spec.to_string();
  est.k = sample.k_requested;
  est.threshold = sample.threshold;
  est.points.reserve(steps.size());
  for (const auto& [y, c] : steps) est.points.push_back({y, c / total});
  return est;
}

MassDistributionEstimate mass_distribution(const SampleResult& sample,
                                           std::string_view mass_variable,
                                           std::string_view quantile_variable) {
  if (mass_variable.empty()) {
    throw Error(ErrorCode::InvalidArgument, "mass variable name must not be empty");
  }
  const auto terms = sorted_terms(sample, quantile_variable, mass_variable);

  struct Step {
    double y, count, mass;
  };
  std::vector<Step> steps;
  CompensatedSum count;
  CompensatedSum mass;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    count += terms[i].count;
    mass += terms[i].mass;
    if (i + 1 == terms.size() || terms[i + 1].y != terms[i].y) {
      steps.push_back({terms[i].y, count.value(), mass.value()});
    }
  }
  const double total_count = steps.back().count;
  const double total_mass = steps.back().mass;
  if (!(total_mass > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "estimated total of '" + std::string(mass_variable) + "' is zero");
  }

  MassDistributionEstimate est;
  est.mass_variable = std::string(mass_variable);
  est.quantile_variable = std::string(quantile_variable);
  est.weight = sample.weight_spec.to_string();
  est.k = sample.k_requested;
  est.threshold = sample.threshold;
  est.points.reserve(steps.size());
  for (const auto& s : steps) est.points.push_back({s.y, s.count / total_count, s.mass / total_mass});
  return est;
}

SampleResult restrict(const SampleResult& sample, const Predicate& pred) {
  SampleResult out = sample;
  out.entries.clear();
  for (const auto& e : sample.entries) {
    if (pred.evaluate(e.features)) out.entries.push_back(e);
  }
  out.k_returned = out.entries.size();
  return out;
}

void write_estimate(std::ostream& out, const DistributionEstimate& est) {
  out << "# prisample cdf v1\n";
  out << "variable=" << est.variable << '\n';
  out << "weight=" << est.weight << '\n';
  out << "k=" << est.k << '\n';
  out << "threshold=" << format_double(est.threshold) << '\n';
  out << "points=" << est.points.size() << '\n';
  out << "y,q\n";
  for (const auto& p : est.points) out << format_double(p.y) << ',' << format_double(p.q) << '\n';
}

void write_estimate(std::ostream& out, const MassDistributionEstimate& est) {
  out << "# prisample mass v1\n";
  out << "mass=" << est.mass_variable << '\n';
  out << "by=" << est.quantile_variable << '\n';
  out << "weight=" << est.weight << '\n';
  out << "k=" << est.k << '\n';
  out << "threshold=" << format_double(est.threshold) << '\n';
  out << "points=" << est.points.size() << '\n';
  out << "y,q,r\n";
  for (const auto& p : est.points) {
    out << format_double(p.y) << ',' << format_double(p.q) << ',' << format_double(p.r) << '\n';
  }
}

}  // namespace prisample
