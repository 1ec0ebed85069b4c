#include "prisample/eval.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include "prisample/error.hpp"
#include "prisample/numeric.hpp"
#include "prisample/playout.hpp"
#include "prisample/sampler.hpp"
#include "prisample/synth.hpp"

namespace prisample {

namespace {

constexpr double kEndTolerance = 1e-12;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedCurve, what); }

void check_cdf(std::span<const CdfPoint> c) {
  if (c.empty()) malformed("empty curve");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i].q >= 0.0 && c[i].q <= 1.0 + kEndTolerance)) malformed("q outside [0, 1]");
    if (i > 0 && (c[i].y <= c[i - 1].y || c[i].q < c[i - 1].q)) malformed("curve is not monotone");
  }
  if (std::fabs(c.back().q - 1.0) > kEndTolerance) malformed("curve does not reach q = 1");
}

void check_mass(std::span<const MassPoint> c) {
  if (c.empty()) malformed("empty curve");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i].q >= 0.0 && c[i].q <= 1.0 + kEndTolerance)) malformed("q outside [0, 1]");
    if (!(c[i].r >= 0.0 && c[i].r <= 1.0 + kEndTolerance)) malformed("r outside [0, 1]");
    if (i > 0 && (c[i].q < c[i - 1].q || c[i].r < c[i - 1].r)) malformed("curve is not monotone");
  }
  if (std::fabs(c.back().q - 1.0) > kEndTolerance || std::fabs(c.back().r - 1.0) > kEndTolerance) {
    malformed("curve does not end at (1, 1)");
  }
}

std::vector<double> q_grid(std::span<const MassPoint> a, std::span<const MassPoint> b) {
  std::vector<double> grid;
  grid.reserve(a.size() + b.size());
  for (const auto& p : a) grid.push_back(p.q);
  for (const auto& p : b) grid.push_back(p.q);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// r at the first step whose q reaches each grid value; the grid is sorted so
// one forward pass suffices.
class InverseLookup {
 public:
  explicit InverseLookup(std::span<const MassPoint> curve) : curve_(curve) {}

  double operator()(double q) {
    while (pos_ + 1 < curve_.size() && curve_[pos_].q < q) ++pos_;
    return curve_[pos_].r;
  }

 private:
  std::span<const MassPoint> curve_;
  std::size_t pos_ = 0;
};

}  // namespace

double ks_statistic(std::span<const CdfPoint> est, std::span<const CdfPoint> truth) {
  check_cdf(est);
  check_cdf(truth);
  double worst = 0.0;
  double fa = 0.0;
  double fb = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < est.size() || j < truth.size()) {
    double y;
    if (j == truth.size() || (i < est.size() && est[i].y <= truth[j].y)) {
      y = est[i].y;
    } else {
      y = truth[j].y;
    }
    while (i < est.size() && est[i].y <= y) fa = est[i++].q;
    while (j < truth.size() && truth[j].y <= y) fb = truth[j++].q;
    worst = std::max(worst, std::fabs(fa - fb));
  }
  return std::min(worst, 1.0);
}

double ks_statistic(const DistributionEstimate& est, const DistributionEstimate& truth) {
  return ks_statistic(std::span<const CdfPoint>(est.points), std::span<const CdfPoint>(truth.points));
}

double ks_statistic(std::span<const MassPoint> est, std::span<const MassPoint> truth) {
  check_mass(est);
  check_mass(truth);
  InverseLookup re(est);
  InverseLookup rt(truth);
  double worst = 0.0;
  for (const double q : q_grid(est, truth)) worst = std::max(worst, std::fabs(re(q) - rt(q)));
  return std::min(worst, 1.0);
}

double ks_statistic(const MassDistributionEstimate& est, const MassDistributionEstimate& truth) {
  return ks_statistic(std::span<const MassPoint>(est.points), std::span<const MassPoint>(truth.points));
}

double mass_ks_by_value(std::span<const MassPoint> est, std::span<const MassPoint> truth) {
  check_mass(est);
  check_mass(truth);
  for (const auto c : {est, truth}) {
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c[i].y <= c[i - 1].y) malformed("curve values are not increasing");
    }
  }
  double worst = 0.0;
  double ra = 0.0;
  double rb = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < est.size() || j < truth.size()) {
    const double y = j == truth.size() || (i < est.size() && est[i].y <= truth[j].y) ? est[i].y
                                                                                    : truth[j].y;
    while (i < est.size() && est[i].y <= y) ra = est[i++].r;
    while (j < truth.size() && truth[j].y <= y) rb = truth[j++].r;
    worst = std::max(worst, std::fabs(ra - rb));
  }
  return std::min(worst, 1.0);
}

std::vector<std::pair<double, double>> qq_curve(const MassDistributionEstimate& est,
                                                const MassDistributionEstimate& truth) {
  check_mass(est.points);
  check_mass(truth.points);
  InverseLookup re(est.points);
  InverseLookup rt(truth.points);
  std::vector<std::pair<double, double>> out;
  for (const double q : q_grid(est.points, truth.points)) {
    const double t = rt(q);
    out.emplace_back(t, re(q));
  }
  return out;
}

void EvalSpec::validate() const {
  if (runs < 1) throw Error(ErrorCode::InvalidArgument, "eval needs runs >= 1");
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "eval needs k >= 2");
  if (weights.empty() || targets.empty()) {
    throw Error(ErrorCode::InvalidArgument, "eval needs at least one weighting and one target");
  }
}

EvalSpec node_eval_spec(std::size_t runs, std::size_t k, std::uint64_t base_seed) {
  EvalSpec spec;
  spec.dataset = "nodes";
  spec.runs = runs;
  spec.k = k;
  spec.base_seed = base_seed;
  spec.weights = {WeightSpec::uniform(), WeightSpec::feature("fo"), WeightSpec::feature("fr"),
                  WeightSpec::feature("ac")};
  const char* vars[] = {"fo", "fr", "ac"};
  for (const char* x : vars) spec.targets.push_back({x, std::nullopt});
  for (const char* by : vars) {
    for (const char* x : vars) spec.targets.push_back({x, std::string(by)});
  }
  return spec;
}

EvalSpec link_eval_spec(std::size_t runs, std::size_t k, std::uint64_t base_seed) {
  EvalSpec spec;
  spec.dataset = "links";
  spec.runs = runs;
  spec.k = k;
  spec.base_seed = base_seed;
  spec.weights = {WeightSpec::uniform(), WeightSpec::feature("fo1"), WeightSpec::feature("fo2"),
                  WeightSpec::ratio("fo2", "fo1")};
  spec.targets.push_back({"ffan", std::nullopt});
  for (const char* by : {"fo1", "fo2", "ffan"}) spec.targets.push_back({"ffan", std::string(by)});
  return spec;
}

const KsCell& KsTable::at(const WeightSpec& weight, const EvalTarget& target) const {
  for (const auto& c : cells) {
    if (c.weight == weight && c.target == target) return c;
  }
  throw Error(ErrorCode::InvalidArgument, "no cell for weight " + weight.to_string() + ", target " +
                                              target.variable);
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median of an empty set");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

KsTable run_eval(std::span<const Record> records, const EvalSpec& spec) {
  spec.validate();
  if (records.empty()) throw Error(ErrorCode::EmptySample, "eval needs a nonempty dataset");

  struct Truth {
    DistributionEstimate cdf;
    MassDistributionEstimate mass;
  };
  std::vector<Truth> truths;
  truths.reserve(spec.targets.size());
  for (const auto& t : spec.targets) {
    Truth truth;
    if (t.is_mass()) {
      truth.mass = true_mass(records, t.variable, *t.by);
    } else {
      truth.cdf = true_cdf(records, t.variable);
    }
    truths.push_back(std::move(truth));
  }

  const auto n_weights = spec.weights.size();
  const auto n_targets = spec.targets.size();
  // ks[(run * n_weights + w) * n_targets + t]
  std::vector<double> ks(spec.runs * n_weights * n_targets);
  const auto n_tasks = spec.runs * n_weights;

  const auto run_task = [&](std::size_t task) {
    const auto run = task / n_weights;
    const auto w = task % n_weights;
    const auto master = build_master(records, spec.weights[w], spec.base_seed + run + 1, spec.k + 1);
    const auto sample = sample_by_predicate(master, Predicate::always(), spec.k);
    for (std::size_t t = 0; t < n_targets; ++t) {
      const auto& target = spec.targets[t];
      double value;
      if (target.is_mass()) {
        value = ks_statistic(mass_distribution(sample, target.variable, *target.by), truths[t].mass);
      } else {
        value = ks_statistic(ordinary_cdf(sample, target.variable), truths[t].cdf);
      }
      ks[task * n_targets + t] = value;
    }
  };

  std::size_t threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : spec.threads;
  threads = std::min(threads, n_tasks);
  if (threads <= 1) {
    for (std::size_t task = 0; task < n_tasks; ++task) run_task(task);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
      std::vector<std::jthread> pool;
      for (std::size_t i = 0; i < threads; ++i) {
        pool.emplace_back([&, i] {
          try {
            for (std::size_t task = next++; task < n_tasks && !failed; task = next++) run_task(task);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  KsTable table;
  table.dataset = spec.dataset;
  table.runs = spec.runs;
  table.k = spec.k;
  table.base_seed = spec.base_seed;
  for (std::size_t w = 0; w < n_weights; ++w) {
    for (std::size_t t = 0; t < n_targets; ++t) {
      KsCell cell;
      cell.weight = spec.weights[w];
      cell.target = spec.targets[t];
      for (std::size_t run = 0; run < spec.runs; ++run) {
        cell.per_run.push_back(ks[(run * n_weights + w) * n_targets + t]);
      }
      cell.median_ks = median(cell.per_run);
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

namespace {

std::string target_label(const EvalTarget& t) { return t.by ? *t.by : std::string("-"); }

}  // namespace

void write_table_text(std::ostream& out, const KsTable& table) {
  std::vector<std::array<std::string, 5>> rows;
  rows.push_back({"weight", "X", "X'", "median_ks", "runs"});
  for (const auto& c : table.cells) {
    rows.push_back({c.weight.to_string(), c.target.variable, target_label(c.target),
                    format_double(c.median_ks), std::to_string(c.per_run.size())});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  out << "# prisample ks-table v1 dataset=" << table.dataset << " runs=" << table.runs
      << " k=" << table.k << " seed=" << table.base_seed << '\n';
  out << "# X' = '-' for ordinary distributions, else quantile variable of the mass distribution\n";
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i > 0) line += "  ";
      line += r[i];
      if (i + 1 < r.size()) line.append(width[i] - r[i].size(), ' ');
    }
    out << line << '\n';
  }
}

void write_table_rows(std::ostream& out, const KsTable& table) {
  out << "w,X,X',median_ks,runs\n";
  for (const auto& c : table.cells) {
    out << c.weight.to_string() << ',' << c.target.variable << ',' << (c.target.by ? *c.target.by : "")
        << ',' << format_double(c.median_ks) << ',' << c.per_run.size() << '\n';
  }
}

void write_table_raw(std::ostream& out, const KsTable& table) {
  out << "w,X,X',run,seed,ks\n";
  for (const auto& c : table.cells) {
    for (std::size_t r = 0; r < c.per_run.size(); ++r) {
      out << c.weight.to_string() << ',' << c.target.variable << ','
          << (c.target.by ? *c.target.by : "") << ',' << r + 1 << ',' << table.base_seed + r + 1
          << ',' << format_double(c.per_run[r]) << '\n';
    }
  }
}

void write_qq(std::ostream& out, std::span<const std::pair<double, double>> points) {
  out << "# true_r estimated_r\n";
  for (const auto& [t, e] : points) out << format_double(t) << ' ' << format_double(e) << '\n';
}

}  // namespace prisample
