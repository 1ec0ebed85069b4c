#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <map>
#include <set>

#include "prisample/error.hpp"
#include "prisample/synth.hpp"
#include "support.hpp"

using namespace prisample;
using testing::code_of;

namespace {

// Plain Pearson correlation of ranks, ranks averaged over ties; written
// independently of prisample::spearman.
double rank_correlation(std::vector<double> x, std::vector<double> y) {
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
      for (std::size_t t = i; t < j; ++t) r[idx[t]] = 0.5 * static_cast<double>(i + j - 1);
      i = j;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Least-squares slope of log P(X >= x) against log x over the records whose
// empirical survival lies in [lo, hi].
double tail_slope(std::vector<double> v, double lo, double hi) {
  std::sort(v.begin(), v.end(), std::greater<>());
  const double n = static_cast<double>(v.size());
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Survival at a tied value is the share of records at or above it.
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    const double s = static_cast<double>(j + 1) / n;
    if (s >= lo && s <= hi) pts.emplace_back(std::log(v[i]), std::log(s));
    i = j;
  }
  double mx = 0, my = 0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxy / sxx;
}

SynthConfig config(std::size_t n, std::uint64_t seed) {
  SynthConfig c;
  c.n_nodes = n;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("Spearman to Pearson conversion") {
    CHECK(gaussian_correlation_from_spearman(0.0) == 0.0);
    CHECK(gaussian_correlation_from_spearman(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gaussian_correlation_from_spearman(0.82) == 2.0 * std::sin(std::numbers::pi * 0.82 / 6.0));
  }

  TEST_CASE("copula factor reproduces the correlation matrix") {
    const SynthConfig c;
    const auto l = copula_factor(c.spearman);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double v = 0;
        for (int k = 0; k < 3; ++k) v += l[i][k] * l[j][k];
        const double want = i == j ? 1.0 : 2.0 * std::sin(std::numbers::pi * c.spearman[i][j] / 6.0);
        CHECK(v == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("singular PSD is accepted, indefinite is rejected") {
    const Matrix3 ones{{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}};
    const auto l = copula_factor(ones);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double v = 0;
        for (int k = 0; k < 3; ++k) v += l[i][k] * l[j][k];
        CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
    const Matrix3 bad{{{1, 0.9, 0.9}, {0.9, 1, -0.9}, {0.9, -0.9, 1}}};
    CHECK(code_of([&] { copula_factor(bad); }) == ErrorCode::NotPositiveSemidefinite);
  }

  TEST_CASE("config validation and JSON") {
    SynthConfig c;
    c.spearman[0][1] = 0.5;  // no longer symmetric
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
    SynthConfig d;
    d.marginals[2] = Marginal::pareto(0.0, 1.0);
    CHECK(code_of([&] { d.validate(); }) == ErrorCode::InvalidArgument);

    SynthConfig e;
    e.n_nodes = 123;
    e.n_links = 45;
    e.seed = 6;
    e.marginals[1] = Marginal::lognormal(2.0, 1.5);
    e.spearman[0][2] = e.spearman[2][0] = -0.25;
    const auto back = SynthConfig::from_json(e.to_json());
    CHECK(back.to_json() == e.to_json());
    CHECK(back.n_nodes == 123);
    CHECK(back.marginals[1].family == MarginalFamily::discretized_lognormal);
    CHECK(back.spearman[2][0] == -0.25);

    CHECK(code_of([] { SynthConfig::from_json(R"({"nodes": 5})"); }) == ErrorCode::Parse);
    CHECK(code_of([] { SynthConfig::from_json("{"); }) == ErrorCode::Parse);
    CHECK(code_of([] { SynthConfig::from_json(R"({"spearman": {"fo_fr": 2}})"); }) ==
          ErrorCode::InvalidArgument);
    CHECK(SynthConfig::from_json("{}").to_json() == SynthConfig{}.to_json());
  }

  TEST_CASE("marginal quantiles") {
    const auto p = Marginal::pareto(1.2, 10.0);
    CHECK(p.value_at_survival(1.0) == 10.0);
    CHECK(p.value_at_survival(0.5) == std::floor(10.0 * std::pow(0.5, -1.0 / 1.2)));
    const auto ln = Marginal::lognormal(1.0, 0.5);
    CHECK(ln.value_at_survival(0.5) == std::round(std::exp(1.0)));
    CHECK(ln.value_at_survival(0.01) > ln.value_at_survival(0.5));
  }

  TEST_CASE("nodes: ids, integer features, determinism") {
    const auto a = generate_nodes(config(2000, 5));
    const auto b = generate_nodes(config(2000, 5));
    const auto c = generate_nodes(config(2000, 6));
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a[17].id == "n17");
    for (const auto& r : a) {
      for (const auto& [name, v] : r.features) {
        REQUIRE(v == std::floor(v));
        REQUIRE(v >= 10.0);
      }
    }
    // Record i does not depend on how many records are generated.
    const auto shorter = generate_nodes(config(100, 5));
    for (std::size_t i = 0; i < shorter.size(); ++i) REQUIRE(shorter[i] == a[i]);
  }

  TEST_CASE("independent copula gives near-zero rank correlation") {
    auto cfg = config(100000, 21);
    cfg.spearman = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    const auto nodes = generate_nodes(cfg);
    const auto fo = feature_column(nodes, "fo");
    const auto fr = feature_column(nodes, "fr");
    const auto ac = feature_column(nodes, "ac");
    CHECK(std::fabs(rank_correlation(fo, fr)) < 0.03);
    CHECK(std::fabs(rank_correlation(fo, ac)) < 0.03);
    CHECK(std::fabs(rank_correlation(fr, ac)) < 0.03);
  }

  TEST_CASE("paper Spearman targets are met within 0.05") {
    const auto nodes = generate_nodes(config(100000, 3));
    const auto fo = feature_column(nodes, "fo");
    const auto fr = feature_column(nodes, "fr");
    const auto ac = feature_column(nodes, "ac");
    const double fo_fr = rank_correlation(fo, fr);
    const double fo_ac = rank_correlation(fo, ac);
    const double fr_ac = rank_correlation(fr, ac);
    CAPTURE(fo_fr);
    CAPTURE(fo_ac);
    CAPTURE(fr_ac);
    CHECK(std::fabs(fo_fr - 0.82) <= 0.05);
    CHECK(std::fabs(fo_ac - 0.53) <= 0.05);
    CHECK(std::fabs(fr_ac - 0.44) <= 0.05);
    // The library's own Spearman agrees with the test oracle.
    CHECK(spearman(fo, fr) == doctest::Approx(fo_fr).epsilon(1e-9));
  }

  TEST_CASE("Pareto tails have the configured slope") {
    const auto nodes = generate_nodes(config(100000, 8));
    const double fo = tail_slope(feature_column(nodes, "fo"), 1e-3, 1e-2);
    const double fr = tail_slope(feature_column(nodes, "fr"), 1e-3, 1e-2);
    const double ac = tail_slope(feature_column(nodes, "ac"), 1e-3, 1e-2);
    CAPTURE(fo);
    CAPTURE(fr);
    CAPTURE(ac);
    CHECK(std::fabs(fo + 1.2) <= 0.2);
    CHECK(std::fabs(fr + 1.2) <= 0.2);
    CHECK(std::fabs(ac + 1.5) <= 0.2);
  }

  TEST_CASE("spearman helper") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{5, 6, 7, 8, 7};
    CHECK(spearman(x, x) == doctest::Approx(1.0));
    CHECK(spearman(x, y) == doctest::Approx(rank_correlation(x, y)).epsilon(1e-12));
    const std::vector<double> rev{5, 4, 3, 2, 1};
    CHECK(spearman(x, rev) == doctest::Approx(-1.0));
  }

  TEST_CASE("links between two nodes") {
    const std::vector<Record> nodes{Record::node("a", 10, 1, 1), Record::node("b", 50, 1, 1)};
    const auto links = generate_links(nodes, 200, 9);
    REQUIRE(links.size() == 200);
    std::set<std::string> ids;
    for (const auto& l : links) {
      const double f = l.features.at("ffan");
      REQUIRE((f == 5.0 || f == 0.2));
      REQUIRE(l.ends->from != l.ends->to);
      REQUIRE(ids.insert(l.id).second);
    }
    CHECK(ids.count("a->b#2") == 1);
  }

  TEST_CASE("links: counts, reciprocity, zero-fo sources skipped") {
    auto nodes = generate_nodes(config(500, 2));
    nodes.push_back(Record::node("zero", 0, 5, 5));
    const auto links = generate_links(nodes, 5000, 4);
    REQUIRE(links.size() == 5000);
    std::set<std::string> ids;
    std::map<std::pair<std::string, std::string>, double> ffan;
    for (const auto& l : links) {
      REQUIRE(ids.insert(l.id).second);
      REQUIRE(l.ends->from != "zero");
      REQUIRE(l.ends->to != "zero");  // selection is proportional to fo
      REQUIRE(l.features.at("ffan") == l.features.at("fo2") / l.features.at("fo1"));
      ffan[{l.ends->from, l.ends->to}] = l.features.at("ffan");
    }
    int pairs = 0;
    for (const auto& [k, f] : ffan) {
      const auto it = ffan.find({k.second, k.first});
      if (it == ffan.end()) continue;
      ++pairs;
      REQUIRE(f * it->second == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(pairs > 0);
    CHECK(generate_links(nodes, 300, 4) == std::vector<Record>(links.begin(), links.begin() + 300));
  }

  TEST_CASE("links need two nodes with positive fo") {
    const std::vector<Record> nodes{Record::node("a", 10, 1, 1), Record::node("b", 0, 1, 1)};
    CHECK(code_of([&] { generate_links(nodes, 1, 1); }) == ErrorCode::InsufficientNodes);
    CHECK(generate_links(nodes, 0, 1).empty());
  }

  TEST_CASE("true curves") {
    const std::vector<Record> rs{Record::node("c", 3, 0, 0), Record::node("a", 1, 0, 0),
                                 Record::node("b", 2, 0, 0)};
    const auto cdf = true_cdf(rs, "fo");
    REQUIRE(cdf.points.size() == 3);
    CHECK(cdf.points[1].y == 2.0);
    CHECK(cdf.points[1].q == 2.0 / 3.0);
    CHECK(cdf.weight == "population");

    const std::vector<Record> ties{Record::node("a", 1, 0, 0), Record::node("b", 1, 0, 0),
                                   Record::node("c", 2, 0, 0)};
    const auto mass = true_mass(ties, "fo", "fo");
    REQUIRE(mass.points.size() == 2);
    CHECK(mass.points[0].q == 2.0 / 3.0);
    CHECK(mass.points[0].r == 0.5);
    CHECK(code_of([] { true_cdf(std::vector<Record>{}, "fo"); }) == ErrorCode::EmptySample);
  }

  TEST_CASE("true curves do not depend on record order") {
    testing::Gen g(10);
    auto rs = testing::pareto_nodes(g, 3000);
    const auto cdf = true_cdf(rs, "fr");
    const auto mass = true_mass(rs, "fo", "ac");
    std::shuffle(rs.begin(), rs.end(), g.rng);
    CHECK(true_cdf(rs, "fr").points == cdf.points);
    CHECK(true_mass(rs, "fo", "ac").points == mass.points);
  }
}
