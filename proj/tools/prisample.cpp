// prisample: command-line front end.
//
//   prisample synth    --seed S --out nodes.csv [--links-out links.csv] [--config cfg.json]
//   prisample build    --input data.csv --weight feature:fo --seed S [--kmax N] --out master.csv
//   prisample sample   --master master.csv --input data.csv --k N [--predicate P] [--cost-limited]
//   prisample extend   --master master.csv --input data.csv --sample prev.txt --j N
//   prisample estimate --sample s.txt (--cdf X | --mass X --by Y | --sum X | --count) [--where P]
//   prisample eval     --input data.csv --seed S [--runs N] [--k N] [--format text|rows]
//   prisample true-cdf / true-mass / qq
//
// Output goes to --out, or stdout when absent. Failures print one line,
// `error code=<Code>: <message>`, and exit with status 1 (2 for usage).

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "prisample/csv.hpp"
#include "prisample/error.hpp"
#include "prisample/estimate.hpp"
#include "prisample/eval.hpp"
#include "prisample/numeric.hpp"
#include "prisample/playout.hpp"
#include "prisample/predicate.hpp"
#include "prisample/sampler.hpp"
#include "prisample/synth.hpp"

namespace fs = std::filesystem;
using namespace prisample;

namespace {

struct Options {
  std::string input;
  std::string out;
  std::string links_out;
  std::string config;
  std::string master;
  std::string sample;
  std::string raw;
  std::string weight = "uniform";
  std::string predicate = "true";
  std::string where = "true";
  std::string format = "text";
  std::string variable;
  std::string mass;
  std::string by;
  std::string sum;
  bool count = false;
  bool cost_limited = false;
  std::uint64_t seed = 0;
  std::optional<std::size_t> kmax;
  std::optional<std::size_t> nodes;
  std::optional<std::size_t> links;
  std::size_t k = 1000;
  std::size_t j = 1;
  std::size_t runs = 100;
  std::size_t threads = 1;
};

// Writes through a string so a failed command never leaves a partial file.
void emit(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream buf;
  body(buf);
  if (path.empty() || path == "-") {
    std::cout << buf.str();
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  f << buf.str();
  if (!f.flush()) throw Error(ErrorCode::Io, "write failed: " + path);
}

SynthConfig synth_config(const Options& o) {
  SynthConfig cfg;
  if (!o.config.empty()) {
    std::ifstream f(o.config, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + o.config);
    std::stringstream text;
    text << f.rdbuf();
    cfg = SynthConfig::from_json(text.str());
  }
  if (o.nodes) cfg.n_nodes = *o.nodes;
  if (o.links) cfg.n_links = *o.links;
  cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

void cmd_synth(const Options& o) {
  const auto cfg = synth_config(o);
  const auto nodes = generate_nodes(cfg);
  emit(o.out, [&](std::ostream& out) { write_nodes(out, nodes); });
  if (!o.links_out.empty()) {
    const auto links = generate_links(nodes, cfg.n_links, cfg.seed);
    emit(o.links_out, [&](std::ostream& out) { write_links(out, links); });
  } else if (cfg.n_links > 0) {
    throw Error(ErrorCode::InvalidArgument, "--links given without --links-out");
  }
}

void cmd_build(const Options& o) {
  if (o.out.empty() || o.out == "-") {
    throw Error(ErrorCode::InvalidArgument, "build needs a file for --out (the sidecar sits next to it)");
  }
  const auto spec = WeightSpec::parse(o.weight);
  const auto records = read_records(fs::path(o.input));
  const Population population(records);  // rejects duplicate ids
  const auto master = build_master(population.records(), spec, o.seed, o.kmax);
  save_master(master, o.out);
}

MasterSample master_with_features(const Options& o) {
  auto master = load_master(o.master);
  const Population population(read_records(fs::path(o.input)));
  return master.with_features(population);
}

void cmd_sample(const Options& o) {
  const auto pred = Predicate::parse(o.predicate);
  const auto master = master_with_features(o);
  const auto result = o.cost_limited ? sample_cost_limited(master, pred, o.k)
                                     : sample_by_predicate(master, pred, o.k);
  emit(o.out, [&](std::ostream& out) { write_sample(out, result); });
}

void cmd_extend(const Options& o) {
  const auto prev = load_sample(o.sample);
  const auto master = master_with_features(o);
  const auto result = o.predicate == "true" ? extend_sample(master, prev, o.j)
                                            : extend_sample(master, prev, Predicate::parse(o.predicate), o.j);
  emit(o.out, [&](std::ostream& out) { write_sample(out, result); });
}

void write_scalar(std::ostream& out, std::string_view kind, const SampleResult& s,
                  std::string_view feature, const Predicate& where, double value) {
  out << "# prisample " << kind << " v1\n";
  if (!feature.empty()) out << "feature=" << feature << '\n';
  out << "weight=" << s.weight_spec.to_string() << '\n'
      << "predicate=" << s.predicate.to_string() << '\n'
      << "where=" << where.to_string() << '\n'
      << "k=" << s.k_requested << '\n'
      << "threshold=" << format_double(s.threshold) << '\n'
      << "value=" << format_double(value) << '\n';
}

void cmd_estimate(const Options& o) {
  const int chosen = !o.variable.empty() + !o.mass.empty() + !o.sum.empty() + o.count;
  if (chosen != 1) {
    throw Error(ErrorCode::InvalidArgument, "estimate needs exactly one of --cdf, --mass, --sum, --count");
  }
  if (!o.mass.empty() && o.by.empty()) throw Error(ErrorCode::InvalidArgument, "--mass needs --by");
  if (o.mass.empty() && !o.by.empty()) throw Error(ErrorCode::InvalidArgument, "--by needs --mass");
  const auto where = Predicate::parse(o.where);
  const auto full = load_sample(o.sample);
  if (!o.sum.empty()) {
    const double v = subset_sum(full, o.sum, where);
    emit(o.out, [&](std::ostream& out) { write_scalar(out, "subset-sum", full, o.sum, where, v); });
    return;
  }
  if (o.count) {
    const double v = subset_count(full, where);
    emit(o.out, [&](std::ostream& out) { write_scalar(out, "subset-count", full, "", where, v); });
    return;
  }
  const auto s = restrict(full, where);
  if (!o.variable.empty()) {
    const auto est = ordinary_cdf(s, o.variable);
    emit(o.out, [&](std::ostream& out) { write_estimate(out, est); });
  } else {
    const auto est = mass_distribution(s, o.mass, o.by);
    emit(o.out, [&](std::ostream& out) { write_estimate(out, est); });
  }
}

void cmd_eval(const Options& o) {
  if (o.format != "text" && o.format != "rows") {
    throw Error(ErrorCode::InvalidArgument, "--format must be text or rows");
  }
  const auto records = read_records(fs::path(o.input));
  if (records.empty()) throw Error(ErrorCode::EmptySample, o.input + ": no records");
  auto spec = records.front().kind == RecordKind::link ? link_eval_spec(o.runs, o.k, o.seed)
                                                       : node_eval_spec(o.runs, o.k, o.seed);
  spec.dataset = fs::path(o.input).filename().string();
  spec.threads = o.threads;
  const auto table = run_eval(records, spec);
  emit(o.out, [&](std::ostream& out) {
    if (o.format == "rows") {
      write_table_rows(out, table);
    } else {
      write_table_text(out, table);
    }
  });
  if (!o.raw.empty()) emit(o.raw, [&](std::ostream& out) { write_table_raw(out, table); });
}

void cmd_true(const Options& o) {
  const auto records = read_records(fs::path(o.input));
  if (records.empty()) throw Error(ErrorCode::EmptySample, o.input + ": no records");
  if (!o.mass.empty()) {
    const auto est = true_mass(records, o.mass, o.by);
    emit(o.out, [&](std::ostream& out) { write_estimate(out, est); });
  } else {
    const auto est = true_cdf(records, o.variable);
    emit(o.out, [&](std::ostream& out) { write_estimate(out, est); });
  }
}

void cmd_qq(const Options& o) {
  const auto records = read_records(fs::path(o.input));
  if (records.empty()) throw Error(ErrorCode::EmptySample, o.input + ": no records");
  const auto sample = load_sample(o.sample);
  const auto est = mass_distribution(sample, o.mass, o.by);
  const auto truth = true_mass(records, o.mass, o.by);
  const auto points = qq_curve(est, truth);
  emit(o.out, [&](std::ostream& out) { write_qq(out, points); });
}

int fail(std::string_view code, const std::string& message, int status) {
  std::string line = message;
  for (auto& c : line) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "error code=" << code << ": " << line << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Priority-sampling master samples, playouts and estimates"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  const auto seed_flag = [&](CLI::App* c) {
    return c->add_option("--seed", o.seed, "64-bit seed")->required();
  };
  const auto input_flag = [&](CLI::App* c) {
    return c->add_option("--input", o.input, "node or link CSV")->required()->check(CLI::ExistingFile);
  };
  const auto out_flag = [&](CLI::App* c) { return c->add_option("--out", o.out, "output path (default stdout)"); };

  auto* synth = app.add_subcommand("synth", "generate a synthetic node (and link) population");
  seed_flag(synth);
  out_flag(synth);
  synth->add_option("--config", o.config, "JSON config")->check(CLI::ExistingFile);
  synth->add_option("--nodes", o.nodes, "number of nodes (overrides config)");
  synth->add_option("--links", o.links, "number of links (overrides config)");
  synth->add_option("--links-out", o.links_out, "link CSV path");

  auto* build = app.add_subcommand("build", "build a master sample");
  input_flag(build);
  seed_flag(build);
  build->add_option("--out", o.out, "master data file; sidecar is <out>.meta.json")->required();
  build->add_option("--weight", o.weight, "uniform | feature:NAME | ratio:NUM/DEN");
  build->add_option("--kmax", o.kmax, "keep only the k_max highest priorities");

  auto* sample = app.add_subcommand("sample", "play out a sample");
  sample->add_option("--master", o.master, "master data file")->required()->check(CLI::ExistingFile);
  input_flag(sample);
  out_flag(sample);
  sample->add_option("--k", o.k, "sample size")->required();
  sample->add_option("--predicate", o.predicate, "selection predicate");
  sample->add_flag("--cost-limited", o.cost_limited, "examine only the first k master entries");

  auto* extend = app.add_subcommand("extend", "adjoin the next j matches to a sample");
  extend->add_option("--master", o.master, "master data file")->required()->check(CLI::ExistingFile);
  input_flag(extend);
  out_flag(extend);
  extend->add_option("--sample", o.sample, "previous sample")->required()->check(CLI::ExistingFile);
  extend->add_option("--j", o.j, "number of further matches")->required();
  extend->add_option("--predicate", o.predicate, "must equal the sample's predicate");

  auto* estimate = app.add_subcommand("estimate", "Horvitz-Thompson estimates from a sample");
  estimate->add_option("--sample", o.sample, "sample file")->required()->check(CLI::ExistingFile);
  out_flag(estimate);
  estimate->add_option("--cdf", o.variable, "ordinary distribution of NAME");
  estimate->add_option("--mass", o.mass, "mass distribution of NAME");
  estimate->add_option("--by", o.by, "quantile variable for --mass");
  estimate->add_option("--sum", o.sum, "subset sum of NAME");
  estimate->add_flag("--count", o.count, "subset count");
  estimate->add_option("--where", o.where, "further restriction predicate");

  auto* eval = app.add_subcommand("eval", "median KS tables over repeated runs");
  input_flag(eval);
  seed_flag(eval);
  out_flag(eval);
  eval->add_option("--runs", o.runs, "independent runs")->capture_default_str();
  eval->add_option("--k", o.k, "sample size per run")->capture_default_str();
  eval->add_option("--format", o.format, "text | rows")->capture_default_str();
  eval->add_option("--raw", o.raw, "write per-run KS values here");
  eval->add_option("--threads", o.threads, "worker threads, 0 = all cores")->capture_default_str();

  auto* true_cdf_cmd = app.add_subcommand("true-cdf", "exact ordinary distribution");
  input_flag(true_cdf_cmd);
  out_flag(true_cdf_cmd);
  true_cdf_cmd->add_option("--variable", o.variable, "feature")->required();

  auto* true_mass_cmd = app.add_subcommand("true-mass", "exact mass distribution");
  input_flag(true_mass_cmd);
  out_flag(true_mass_cmd);
  true_mass_cmd->add_option("--mass", o.mass, "mass variable")->required();
  true_mass_cmd->add_option("--by", o.by, "quantile variable")->required();

  auto* qq = app.add_subcommand("qq", "quantile-quantile points of an estimated mass curve");
  input_flag(qq);
  out_flag(qq);
  qq->add_option("--sample", o.sample, "sample file")->required()->check(CLI::ExistingFile);
  qq->add_option("--mass", o.mass, "mass variable")->required();
  qq->add_option("--by", o.by, "quantile variable")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("InvalidArgument", e.what(), 2);
  }

  try {
    if (*synth) cmd_synth(o);
    else if (*build) cmd_build(o);
    else if (*sample) cmd_sample(o);
    else if (*extend) cmd_extend(o);
    else if (*estimate) cmd_estimate(o);
    else if (*eval) cmd_eval(o);
    else if (*true_cdf_cmd || *true_mass_cmd) cmd_true(o);
    else if (*qq) cmd_qq(o);
  } catch (const Error& e) {
    return fail(e.code_name(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("Io", e.what(), 1);
  }
  return 0;
}
