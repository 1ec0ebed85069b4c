#include "prisample/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/erf.hpp>
#include <nlohmann/json.hpp>

#include "prisample/error.hpp"
#include "prisample/hash.hpp"
#include "prisample/numeric.hpp"

namespace prisample {

namespace {

constexpr std::array<std::string_view, 3> kNodeFeatures = {"fo", "fr", "ac"};

// Standard normal quantile.
double normal_quantile(double u) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u); }

// Standard normal upper tail, accurate far into the tail.
double normal_survival(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace

double Marginal::value_at_survival(double s) const {
  switch (family) {
    case MarginalFamily::pareto:
      return std::floor(minimum * std::pow(s, -1.0 / tail_index));
    case MarginalFamily::discretized_lognormal:
      return std::round(std::exp(mu + sigma * -normal_quantile(s)));
  }
  return 0.0;
}

void SynthConfig::validate() const {
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double v = spearman[i][j];
      if (!(v >= -1.0 && v <= 1.0) || v != spearman[j][i] || (i == j && v != 1.0)) {
        throw Error(ErrorCode::InvalidArgument,
                    "Spearman matrix must be symmetric with unit diagonal and entries in [-1, 1]");
      }
    }
  }
  for (const auto& m : marginals) {
    const bool ok = m.family == MarginalFamily::pareto
                        ? (m.tail_index > 0.0 && m.minimum > 0.0 && std::isfinite(m.minimum))
                        : (std::isfinite(m.mu) && m.sigma > 0.0 && std::isfinite(m.sigma));
    if (!ok) throw Error(ErrorCode::InvalidArgument, "invalid marginal parameters");
  }
}

namespace {

nlohmann::ordered_json marginal_json(const Marginal& m) {
  nlohmann::ordered_json j;
  if (m.family == MarginalFamily::pareto) {
    j["family"] = "pareto";
    j["tail_index"] = m.tail_index;
    j["minimum"] = m.minimum;
  } else {
    j["family"] = "lognormal";
    j["mu"] = m.mu;
    j["sigma"] = m.sigma;
  }
  return j;
}

Marginal marginal_from_json(const nlohmann::json& j) {
  const auto family = j.at("family").get<std::string>();
  if (family == "pareto") {
    return Marginal::pareto(j.value("tail_index", 1.2), j.value("minimum", 10.0));
  }
  if (family == "lognormal") {
    return Marginal::lognormal(j.value("mu", 0.0), j.value("sigma", 1.0));
  }
  throw Error(ErrorCode::Parse, "unknown marginal family '" + family + "'");
}

}  // namespace

SynthConfig SynthConfig::from_json(std::string_view text) {
  SynthConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [key, value] : j.items()) {
      if (key == "n_nodes") {
        cfg.n_nodes = value.get<std::size_t>();
      } else if (key == "n_links") {
        cfg.n_links = value.get<std::size_t>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "marginals") {
        for (std::size_t d = 0; d < 3; ++d) {
          const auto name = std::string(kNodeFeatures[d]);
          if (value.contains(name)) cfg.marginals[d] = marginal_from_json(value.at(name));
        }
      } else if (key == "spearman") {
        // {"fo_fr": .., "fo_ac": .., "fr_ac": ..}
        const auto set = [&](const char* name, std::size_t a, std::size_t b) {
          if (value.contains(name)) cfg.spearman[a][b] = cfg.spearman[b][a] = value.at(name).get<double>();
        };
        set("fo_fr", 0, 1);
        set("fo_ac", 0, 2);
        set("fr_ac", 1, 2);
      } else {
        throw Error(ErrorCode::Parse, "unknown synth config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string SynthConfig::to_json() const {
  nlohmann::ordered_json j;
  j["n_nodes"] = n_nodes;
  j["n_links"] = n_links;
  j["seed"] = seed;
  nlohmann::ordered_json m;
  for (std::size_t d = 0; d < 3; ++d) m[std::string(kNodeFeatures[d])] = marginal_json(marginals[d]);
  j["marginals"] = m;
  j["spearman"] = {{"fo_fr", spearman[0][1]}, {"fo_ac", spearman[0][2]}, {"fr_ac", spearman[1][2]}};
  return j.dump(2) + "\n";
}

double gaussian_correlation_from_spearman(double rs) noexcept {
  return 2.0 * std::sin(std::numbers::pi * rs / 6.0);
}

Matrix3 copula_factor(const Matrix3& spearman) {
  Eigen::Matrix3d c;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      c(i, j) = i == j ? 1.0 : gaussian_correlation_from_spearman(spearman[i][j]);
    }
  }
  Eigen::Matrix3d factor;
  Eigen::LLT<Eigen::Matrix3d> llt(c);
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(c);
    const auto& values = eig.eigenvalues();
    if (values.minCoeff() < -1e-10) {
      throw Error(ErrorCode::NotPositiveSemidefinite,
                  "copula correlation matrix has negative eigenvalue " +
                      format_double(values.minCoeff()));
    }
    factor = eig.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  Matrix3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[i][j] = factor(i, j);
  }
  return out;
}

std::vector<Record> generate_nodes(const SynthConfig& config) {
  config.validate();
  const auto factor = copula_factor(config.spearman);
  const auto key = hash_combine(mix64(config.seed), fnv1a64("nodes"));

  std::vector<Record> nodes;
  nodes.reserve(config.n_nodes);
  for (std::size_t i = 0; i < config.n_nodes; ++i) {
    const auto record_key = hash_combine(key, i);
    std::array<double, 3> g{};
    for (std::size_t d = 0; d < 3; ++d) g[d] = normal_quantile(unit_open(hash_combine(record_key, d)));

    std::array<double, 3> value{};
    for (std::size_t d = 0; d < 3; ++d) {
      double z = 0.0;
      for (std::size_t e = 0; e < 3; ++e) z += factor[d][e] * g[e];
      value[d] = config.marginals[d].value_at_survival(normal_survival(z));
    }
    nodes.push_back(Record::node("n" + std::to_string(i), value[0], value[1], value[2]));
  }
  return nodes;
}

std::vector<Record> generate_links(std::span<const Record> nodes, std::size_t n_links,
                                   std::uint64_t seed) {
  if (nodes.size() >= (std::size_t{1} << 32)) {
    throw Error(ErrorCode::InvalidArgument, "too many nodes for link generation");
  }
  if (n_links == 0) return {};
  std::vector<double> cumulative;
  cumulative.reserve(nodes.size());
  CompensatedSum total;
  std::size_t positive = 0;
  for (const auto& n : nodes) {
    const double fo = n.features.at("fo");
    if (fo > 0.0) ++positive;
    total += fo;
    cumulative.push_back(total.value());
  }
  if (positive < 2) {
    throw Error(ErrorCode::InsufficientNodes, "links need at least two nodes with fo > 0, have " +
                                                  std::to_string(positive));
  }
  const double mass = cumulative.back();
  const auto pick = [&](std::uint64_t h) {
    const double target = unit_open(h) * mass;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), nodes.size() - 1);
  };

  constexpr std::uint64_t kMaxAttempts = 10000;
  const auto key = hash_combine(mix64(seed), fnv1a64("links"));
  std::unordered_map<std::uint64_t, std::size_t> occurrences;
  std::vector<Record> links;
  links.reserve(n_links);
  for (std::size_t t = 0; t < n_links; ++t) {
    const auto link_key = hash_combine(key, t);
    bool placed = false;
    for (std::uint64_t attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const auto attempt_key = hash_combine(link_key, attempt);
      const auto a = pick(hash_combine(attempt_key, 1));
      const auto b = pick(hash_combine(attempt_key, 2));
      const double fo1 = nodes[a].features.at("fo");
      if (a == b || fo1 <= 0.0) continue;
      const auto occurrence = ++occurrences[static_cast<std::uint64_t>(a) << 32 | b];
      links.push_back(Record::link(nodes[a].id, nodes[b].id, fo1, nodes[b].features.at("fo"), occurrence));
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorCode::InsufficientNodes,
                  "could not place link " + std::to_string(t) + ": fo mass is concentrated on one node");
    }
  }
  return links;
}

std::vector<double> feature_column(std::span<const Record> records, std::string_view name) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.features.at(name));
  return out;
}

namespace {

std::vector<std::size_t> order_by_value(std::span<const Record> records, std::string_view variable,
                                        std::vector<double>& values) {
  values = feature_column(records, variable);
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return records[a].id < records[b].id;
  });
  return order;
}

}  // namespace

DistributionEstimate true_cdf(std::span<const Record> records, std::string_view variable) {
  if (records.empty()) throw Error(ErrorCode::EmptySample, "true_cdf needs a nonempty population");
  std::vector<double> values;
  const auto order = order_by_value(records, variable, values);

  DistributionEstimate est;
  est.variable = std::string(variable);
  est.weight = "population";
  est.k = records.size();
  const double n = static_cast<double>(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double y = values[order[i]];
    if (i + 1 == order.size() || values[order[i + 1]] != y) {
      est.points.push_back({y, static_cast<double>(i + 1) / n});
    }
  }
  return est;
}

MassDistributionEstimate true_mass(std::span<const Record> records, std::string_view mass_variable,
                                   std::string_view quantile_variable) {
  if (records.empty()) throw Error(ErrorCode::EmptySample, "true_mass needs a nonempty population");
  std::vector<double> values;
  const auto order = order_by_value(records, quantile_variable, values);
  const auto mass = feature_column(records, mass_variable);

  struct Step {
    double y;
    std::size_t count;
    double mass;
  };
  std::vector<Step> steps;
  CompensatedSum cumulative;
  for (std::size_t i = 0; i < order.size(); ++i) {
    cumulative += mass[order[i]];
    const double y = values[order[i]];
    if (i + 1 == order.size() || values[order[i + 1]] != y) {
      steps.push_back({y, i + 1, cumulative.value()});
    }
  }
  const double total = steps.back().mass;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "total of '" + std::string(mass_variable) + "' is zero");
  }

  MassDistributionEstimate est;
  est.mass_variable = std::string(mass_variable);
  est.quantile_variable = std::string(quantile_variable);
  est.weight = "population";
  est.k = records.size();
  const double n = static_cast<double>(records.size());
  est.points.reserve(steps.size());
  for (const auto& s : steps) est.points.push_back({s.y, static_cast<double>(s.count) / n, s.mass / total});
  return est;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "spearman needs two equal-length series of length >= 2");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(x.size() + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace prisample
