#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "prisample/error.hpp"
#include "prisample/playout.hpp"
#include "support.hpp"

using namespace prisample;
using testing::code_of;

namespace {

std::string ids(const SampleResult& s) {
  std::string out;
  for (const auto& e : s.entries) out += e.id + " ";
  return out;
}

// What a predicate-limited sample must contain, computed from the match
// positions alone.
struct Expected {
  std::vector<std::size_t> positions;
  double z;
  bool exhausted;
};

Expected expected_sample(const MasterSample& m, const Predicate& pred, std::size_t k) {
  const auto matches = testing::match_positions(m, pred);
  if (matches.size() > k) {
    return {{matches.begin(), matches.begin() + static_cast<std::ptrdiff_t>(k)}, m[matches[k]].priority,
            false};
  }
  if (!m.capped()) return {matches, 0.0, true};
  if (matches.empty()) return {{}, m[m.size() - 1].priority, true};
  return {{matches.begin(), matches.end() - 1}, m[matches.back()].priority, true};
}

void check_against_oracle(const MasterSample& m, const SampleResult& s, const Expected& want) {
  REQUIRE(s.entries.size() == want.positions.size());
  REQUIRE(s.k_returned == s.entries.size());
  for (std::size_t i = 0; i < want.positions.size(); ++i) {
    REQUIRE(s.entries[i].id == m[want.positions[i]].id);
  }
  REQUIRE(s.threshold == want.z);
  REQUIRE(s.exhausted == want.exhausted);
  if (s.threshold > 0.0) {
    for (const auto& e : s.entries) REQUIRE(e.priority > s.threshold);
  }
}

// Six entries with priorities 80, 70, ..., 30 out of a population of 8;
// `flag` is 1 exactly at 1-based positions 2 and 5.
MasterSample sparse_capped_master() {
  std::vector<PriorityEntry> es;
  for (int i = 1; i <= 8; ++i) {
    const double flag = (i == 2 || i == 5) ? 1.0 : 0.0;
    es.push_back(make_priority_entry("e" + std::to_string(i), 90.0 - 10.0 * i, 1.0,
                                     Features{{"flag", flag}}));
  }
  return build_master(std::move(es), WeightSpec::uniform(), 0, 6);
}

std::vector<Record> playout_population(testing::Gen& g, std::size_t n) {
  return testing::small_nodes(g, n, 12.0);
}

}  // namespace

TEST_SUITE("playout") {
  TEST_CASE("predicate playout on the three-item master") {
    const auto m = testing::fixed_master();
    const auto s1 = sample_by_predicate(m, Predicate::always(), 1);
    CHECK(ids(s1) == "a ");
    CHECK(s1.threshold == doctest::Approx(5.0).epsilon(1e-15));
    CHECK_FALSE(s1.exhausted);
    CHECK(s1.k_requested == 1);
    CHECK(s1.cursor == 1);
    CHECK(s1.master_checksum == m.checksum());

    const auto s3 = sample_by_predicate(m, Predicate::always(), 3);
    CHECK(ids(s3) == "a b c ");
    CHECK(s3.threshold == 0.0);
    CHECK(s3.exhausted);
  }

  TEST_CASE("exhaustion rule on a capped master") {
    const auto m = sparse_capped_master();
    REQUIRE(m.capped());
    const auto s = sample_by_predicate(m, Predicate::parse("flag == 1"), 5);
    CHECK(s.k_returned == 1);
    CHECK(ids(s) == "e2 ");
    CHECK(s.threshold == 40.0);  // priority of the match at position 5
    CHECK(s.exhausted);

    const auto none = sample_by_predicate(m, Predicate::never(), 3);
    CHECK(none.entries.empty());
    CHECK(none.threshold == 30.0);
    CHECK(none.exhausted);
  }

  TEST_CASE("extension examples") {
    const auto m = testing::fixed_master();
    const auto s1 = sample_by_predicate(m, Predicate::always(), 1);
    const auto s2 = extend_sample(m, s1, 1);
    CHECK(ids(s2) == "a b ");
    CHECK(s2.threshold == 4.0);
    CHECK(s2.k_requested == 2);

    const auto all = sample_by_predicate(m, Predicate::always(), 3);
    CHECK(code_of([&] { extend_sample(m, all, 1); }) == ErrorCode::AlreadyExhausted);

    const auto a = extend_sample(m, extend_sample(m, s1, 1), 1);
    const auto b = extend_sample(m, s1, 2);
    CHECK(a == b);
  }

  TEST_CASE("extension preconditions") {
    const auto m = testing::fixed_master();
    const auto other = testing::fixed_master(2);
    const auto s = sample_by_predicate(m, Predicate::parse("x > 0"), 1);
    CHECK(code_of([&] { extend_sample(other, s, 1); }) == ErrorCode::MasterMismatch);
    CHECK(code_of([&] { extend_sample(m, s, 0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { extend_sample(m, s, Predicate::parse("x > 1"), 1); }) ==
          ErrorCode::MasterMismatch);
    CHECK_NOTHROW(extend_sample(m, s, Predicate::parse("x>0"), 1));
    const auto c = sample_cost_limited(m, Predicate::always(), 1);
    CHECK(code_of([&] { extend_sample(m, c, 1); }) == ErrorCode::MasterMismatch);
  }

  TEST_CASE("playout errors") {
    const auto empty = build_master(std::vector<PriorityEntry>{}, WeightSpec::uniform(), 0);
    CHECK(code_of([&] { sample_by_predicate(empty, Predicate::always(), 1); }) == ErrorCode::EmptyMaster);
    CHECK(code_of([&] { sample_cost_limited(empty, Predicate::always(), 1); }) == ErrorCode::EmptyMaster);
    const auto m = testing::fixed_master();
    CHECK(code_of([&] { sample_by_predicate(m, Predicate::parse("fo > 1"), 1); }) ==
          ErrorCode::MissingFeature);
    CHECK(code_of([&] { sample_by_predicate(m, Predicate::always(), 0); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("cost-limited examples") {
    const auto m = testing::fixed_master();
    const auto only_c = Predicate::parse("x < 2");
    const auto s = sample_cost_limited(m, only_c, 2);
    CHECK(s.entries.empty());
    CHECK(s.threshold == 4.0);
    CHECK(s.mode == PlayoutMode::cost_limited);

    const auto t = sample_cost_limited(m, Predicate::always(), 2);
    CHECK(ids(t) == "a b ");
    CHECK(t.threshold == 4.0);
    const auto p = sample_by_predicate(m, Predicate::always(), 2);
    CHECK(t.entries == p.entries);

    const auto all = sample_cost_limited(m, Predicate::always(), 5);
    CHECK(ids(all) == "a b c ");
    CHECK(all.threshold == 0.0);
  }

  TEST_CASE("prefix property and exhaustion against the oracle") {
    testing::Gen g(101);
    for (int trial = 0; trial < 300; ++trial) {
      const auto records = playout_population(g, 1 + g.below(60));
      std::optional<std::size_t> k_max;
      if (g.coin()) k_max = 1 + g.below(records.size() + 5);
      const auto m = build_master(records, WeightSpec::feature("fo"), g.rng(), k_max);
      if (m.empty()) continue;
      const auto pred = testing::random_predicate(g, 3);
      const std::size_t k = 1 + g.below(70);
      const auto s = sample_by_predicate(m, pred, k);
      check_against_oracle(m, s, expected_sample(m, pred, k));
    }
  }

  TEST_CASE("sample then extend equals a single larger sample (1000 cases)") {
    testing::Gen g(555);
    int extended = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto records = playout_population(g, 2 + g.below(80));
      std::optional<std::size_t> k_max;
      if (g.coin(0.3)) k_max = 1 + g.below(records.size());
      const auto m = build_master(records, WeightSpec::feature("fr"), g.rng(), k_max);
      const auto pred = testing::random_predicate(g, 2);
      const std::size_t k = 1 + g.below(30);
      const std::size_t j = 1 + g.below(30);
      const auto first = sample_by_predicate(m, pred, k);
      if (first.exhausted) {
        REQUIRE(code_of([&] { extend_sample(m, first, j); }) == ErrorCode::AlreadyExhausted);
        continue;
      }
      ++extended;
      const auto both = extend_sample(m, first, j);
      check_against_oracle(m, both, expected_sample(m, pred, k + j));
      REQUIRE(both == sample_by_predicate(m, pred, k + j));

      std::set<std::string> seen;
      for (const auto& e : first.entries) seen.insert(e.id);
      for (std::size_t i = 0; i < first.entries.size(); ++i) REQUIRE(both.entries[i] == first.entries[i]);
      for (std::size_t i = first.entries.size(); i < both.entries.size(); ++i) {
        REQUIRE(seen.insert(both.entries[i].id).second);
      }
    }
    CHECK(extended > 300);
  }

  TEST_CASE("chains of extensions never repeat a match") {
    testing::Gen g(8);
    for (int trial = 0; trial < 100; ++trial) {
      const auto records = playout_population(g, 100);
      const auto m = build_master(records, WeightSpec::uniform(), g.rng());
      const auto pred = testing::random_predicate(g, 2);
      auto s = sample_by_predicate(m, pred, 1 + g.below(5));
      std::set<std::string> seen;
      for (const auto& e : s.entries) seen.insert(e.id);
      while (!s.exhausted) {
        const auto prev = s.entries.size();
        s = extend_sample(m, s, 1 + g.below(7));
        for (std::size_t i = prev; i < s.entries.size(); ++i) REQUIRE(seen.insert(s.entries[i].id).second);
      }
      REQUIRE(seen.size() == testing::match_positions(m, pred).size());
    }
  }

  TEST_CASE("cost-limited matches predicate playout under `true` for every k") {
    testing::Gen g(91);
    for (int trial = 0; trial < 60; ++trial) {
      const auto records = playout_population(g, 1 + g.below(40));
      std::optional<std::size_t> k_max;
      if (g.coin()) k_max = 1 + g.below(records.size() + 3);
      const auto m = build_master(records, WeightSpec::feature("ac"), g.rng(), k_max);
      for (std::size_t k = 1; k <= m.size() + 2; ++k) {
        const auto c = sample_cost_limited(m, Predicate::always(), k);
        const auto p = sample_by_predicate(m, Predicate::always(), k);
        REQUIRE(c.entries == p.entries);
        REQUIRE(c.threshold == p.threshold);
        REQUIRE(c.exhausted == p.exhausted);
      }
    }
  }

  TEST_CASE("cost-limited scans exactly the first k entries") {
    testing::Gen g(19);
    const auto records = playout_population(g, 80);
    const auto m = build_master(records, WeightSpec::feature("fo"), 4);
    const auto pred = Predicate::parse("fr >= 6");
    for (std::size_t k = 1; k < m.size(); ++k) {
      const auto s = sample_cost_limited(m, pred, k);
      std::vector<std::string> want;
      for (std::size_t i = 0; i < k; ++i) {
        if (m[i].features.at("fr") >= 6) want.push_back(m[i].id);
      }
      REQUIRE(s.entries.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i) REQUIRE(s.entries[i].id == want[i]);
      REQUIRE(s.threshold == m[k].priority);
    }
  }

  TEST_CASE("both modes give unbiased subset sums (reduced Monte Carlo)") {
    testing::Gen g(77);
    const auto records = testing::pareto_nodes(g, 200);
    const auto pred = Predicate::parse("fr >= 2");
    double truth = 0.0;
    for (const auto& r : records) {
      if (pred.evaluate(r.features)) truth += r.features.at("fo");
    }
    const auto spec = WeightSpec::feature("fo");
    constexpr int kSeeds = 2000;
    for (const auto mode : {PlayoutMode::predicate_limited, PlayoutMode::cost_limited}) {
      double sum = 0.0;
      double sum_sq = 0.0;
      for (int s = 0; s < kSeeds; ++s) {
        const auto m = build_master(records, spec, static_cast<std::uint64_t>(s));
        const auto sample = mode == PlayoutMode::predicate_limited ? sample_by_predicate(m, pred, 20)
                                                                   : sample_cost_limited(m, pred, 20);
        double est = 0.0;
        for (const auto& e : sample.entries) {
          const double p = sample.threshold == 0.0 ? 1.0 : std::min(1.0, e.weight / sample.threshold);
          est += e.features.at("fo") / p;
        }
        sum += est;
        sum_sq += est * est;
      }
      const double mean = sum / kSeeds;
      const double se = std::sqrt((sum_sq - kSeeds * mean * mean) / (kSeeds - 1) / kSeeds);
      CAPTURE(mean);
      CAPTURE(truth);
      CHECK(std::fabs(mean - truth) < 3.0 * se);
    }
  }

  TEST_CASE("serialization round trips bit-exactly") {
    testing::Gen g(13);
    std::vector<PriorityEntry> es;
    for (int i = 0; i < 30; ++i) {
      Features f;
      f.set("fo", g.unit() * 1e6);
      if (i % 3 != 0) f.set("ffan", g.unit() / 3.0);
      const double w = g.unit() * 100.0;
      es.push_back(make_priority_entry("id" + std::to_string(i), w, 1.0 - g.unit() * 0.999, f));
    }
    const auto m = build_master(std::move(es), WeightSpec::feature("fo"), 3, 20);
    for (const auto& s : {sample_by_predicate(m, Predicate::parse("fo > 1000 && !(fo > 9e5)"), 4),
                          sample_by_predicate(m, Predicate::always(), 50),
                          sample_cost_limited(m, Predicate::parse("fo < 5e5"), 7)}) {
      std::ostringstream out;
      write_sample(out, s);
      std::istringstream in(out.str());
      const auto back = read_sample(in);
      CHECK(back == s);
      std::ostringstream again;
      write_sample(again, back);
      CHECK(again.str() == out.str());
    }
  }

  TEST_CASE("malformed sample text") {
    for (const char* bad : {"", "# prisample sample v2\n", "# prisample sample v1\nmode=x\n"}) {
      std::istringstream in(bad);
      CHECK(code_of([&] { read_sample(in); }) == ErrorCode::Parse);
    }
  }
}
