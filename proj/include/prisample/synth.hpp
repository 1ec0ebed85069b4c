#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prisample/estimate.hpp"
#include "prisample/model.hpp"

namespace prisample {

enum class MarginalFamily { pareto, discretized_lognormal };

struct Marginal {
  MarginalFamily family = MarginalFamily::pareto;
  double tail_index = 1.2;  // Pareto alpha
  double minimum = 10.0;    // Pareto scale
  double mu = 0.0;          // lognormal location
  double sigma = 1.0;       // lognormal scale

  static Marginal pareto(double tail_index, double minimum) {
    return {MarginalFamily::pareto, tail_index, minimum, 0.0, 1.0};
  }
  static Marginal lognormal(double mu, double sigma) {
    return {MarginalFamily::discretized_lognormal, 1.2, 10.0, mu, sigma};
  }

  // Integer-valued quantile function at upper-tail probability s in (0, 1):
  // the value exceeded with probability about s.
  double value_at_survival(double s) const;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

// Synthetic node population. Feature order everywhere is (fo, fr, ac).
struct SynthConfig {
  std::size_t n_nodes = 100000;
  std::array<Marginal, 3> marginals = {Marginal::pareto(1.2, 10.0), Marginal::pareto(1.2, 10.0),
                                       Marginal::pareto(1.5, 10.0)};
  // Target Spearman rank correlations of (fo, fr, ac).
  Matrix3 spearman = {{{1.0, 0.82, 0.53}, {0.82, 1.0, 0.44}, {0.53, 0.44, 1.0}}};
  std::size_t n_links = 0;
  std::uint64_t seed = 0;

  // Throws InvalidArgument for a non-symmetric matrix, diagonal != 1,
  // entries outside [-1, 1] or bad marginal parameters.
  void validate() const;

  // JSON text. Unknown keys are rejected; missing keys keep defaults.
  static SynthConfig from_json(std::string_view text);
  std::string to_json() const;
};

// Pearson correlation of the Gaussian copula that yields Spearman rank
// correlation `rs`: 2 sin(pi rs / 6).
double gaussian_correlation_from_spearman(double rs) noexcept;

// Factor L with L L^T = C, where C is the copula correlation matrix.
// Singular (but positive semidefinite) matrices are accepted. Throws
// NotPositiveSemidefinite.
Matrix3 copula_factor(const Matrix3& spearman);

// Node ids are "n<index>". Every draw is keyed by (seed, index), so the
// output does not depend on evaluation order.
std::vector<Record> generate_nodes(const SynthConfig& config);

// Directed links (u1, u2), u1 != u2, both endpoints chosen with probability
// proportional to fo. Candidates with fo(u1) = 0 are skipped. Repeated
// pairs get "#n" id suffixes. Throws InsufficientNodes if fewer than two
// nodes have fo > 0.
std::vector<Record> generate_links(std::span<const Record> nodes, std::size_t n_links,
                                   std::uint64_t seed);

// Exact population curves, the reference for every sampled estimate.
DistributionEstimate true_cdf(std::span<const Record> records, std::string_view variable);
MassDistributionEstimate true_mass(std::span<const Record> records, std::string_view mass_variable,
                                   std::string_view quantile_variable);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

std::vector<double> feature_column(std::span<const Record> records, std::string_view name);

}  // namespace prisample
