#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "prisample/csv.hpp"
#include "prisample/error.hpp"
#include "prisample/estimate.hpp"
#include "prisample/eval.hpp"
#include "prisample/playout.hpp"
#include "prisample/sampler.hpp"
#include "prisample/synth.hpp"

namespace py = pybind11;
using namespace prisample;

namespace {

py::dict features_dict(const Features& f) {
  py::dict d;
  for (const auto& [name, value] : f) d[py::str(name)] = value;
  return d;
}

std::vector<std::pair<double, double>> cdf_points(const DistributionEstimate& e) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : e.points) out.emplace_back(p.y, p.q);
  return out;
}

std::vector<std::tuple<double, double, double>> mass_points(const MassDistributionEstimate& e) {
  std::vector<std::tuple<double, double, double>> out;
  for (const auto& p : e.points) out.emplace_back(p.y, p.q, p.r);
  return out;
}

std::vector<CdfPoint> to_cdf(const std::vector<std::pair<double, double>>& pts) {
  std::vector<CdfPoint> out;
  for (const auto& [y, q] : pts) out.push_back({y, q});
  return out;
}

std::vector<MassPoint> to_mass(const std::vector<std::tuple<double, double, double>>& pts) {
  std::vector<MassPoint> out;
  for (const auto& [y, q, r] : pts) out.push_back({y, q, r});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Priority sampling master samples, playout and Horvitz-Thompson estimates.";

  // prisample.Error carries the stable error code name in `.code`.
  py::object error_type = py::reinterpret_steal<py::object>(
      PyErr_NewException("prisample._core.Error", PyExc_RuntimeError, nullptr));
  m.attr("Error") = error_type;
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::module_::import("prisample._core").attr("Error");
      py::object inst = type(py::str(e.what()));
      inst.attr("code") = py::str(std::string(e.code_name()));
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  py::class_<Record>(m, "Record")
      .def_static("node", &Record::node, py::arg("id"), py::arg("fo"), py::arg("fr"), py::arg("ac"))
      .def_static("link", &Record::link, py::arg("u1"), py::arg("u2"), py::arg("fo1"), py::arg("fo2"),
                  py::arg("occurrence") = 1)
      .def_readonly("id", &Record::id)
      .def_property_readonly("kind", [](const Record& r) { return std::string(to_string(r.kind)); })
      .def_property_readonly("features", [](const Record& r) { return features_dict(r.features); })
      .def("__eq__", [](const Record& a, const Record& b) { return a == b; })
      .def("__repr__", [](const Record& r) { return "<Record " + r.id + ">"; });

  m.def("read_records", py::overload_cast<const std::filesystem::path&>(&read_records), py::arg("path"));
  m.def(
      "write_records",
      [](const std::filesystem::path& path, const std::vector<Record>& records) {
        std::ostringstream out;
        if (!records.empty() && records.front().kind == RecordKind::link) {
          write_links(out, records);
        } else {
          write_nodes(out, records);
        }
        std::ofstream f(path, std::ios::binary);
        if (!(f << out.str())) throw Error(ErrorCode::Io, "cannot write " + path.string());
      },
      py::arg("path"), py::arg("records"));

  py::class_<MasterSample>(m, "MasterSample")
      .def("__len__", &MasterSample::size)
      .def_property_readonly("capped", &MasterSample::capped)
      .def_property_readonly("complete", &MasterSample::complete)
      .def_property_readonly("checksum", &MasterSample::checksum)
      .def_property_readonly("seed", &MasterSample::seed)
      .def_property_readonly("k_max", &MasterSample::k_max)
      .def_property_readonly("population_size", &MasterSample::population_size)
      .def_property_readonly("weight", [](const MasterSample& s) { return s.weight_spec().to_string(); })
      .def("entries",
           [](const MasterSample& s) {
             std::vector<std::tuple<std::string, double, double>> out;
             for (const auto& e : s.entries()) out.emplace_back(e.id, e.weight, e.priority);
             return out;
           })
      .def("with_features",
           [](const MasterSample& s, std::vector<Record> records) {
             return s.with_features(Population(std::move(records)));
           })
      .def("save", [](const MasterSample& s, const std::filesystem::path& p) { save_master(s, p); })
      .def_static("load", &load_master, py::arg("path"));

  m.def(
      "build_master",
      [](const std::vector<Record>& records, const std::string& weight, std::uint64_t seed,
         std::optional<std::size_t> k_max) {
        const Population population(records);
        return build_master(population.records(), WeightSpec::parse(weight), seed, k_max);
      },
      py::arg("records"), py::arg("weight") = "uniform", py::arg("seed") = 0, py::arg("k_max") = py::none());

  py::class_<SampleResult>(m, "Sample")
      .def_property_readonly("ids",
                             [](const SampleResult& s) {
                               std::vector<std::string> out;
                               for (const auto& e : s.entries) out.push_back(e.id);
                               return out;
                             })
      .def_property_readonly("weights",
                             [](const SampleResult& s) {
                               std::vector<double> out;
                               for (const auto& e : s.entries) out.push_back(e.weight);
                               return out;
                             })
      .def_readonly("threshold", &SampleResult::threshold)
      .def_readonly("cursor", &SampleResult::cursor)
      .def_readonly("exhausted", &SampleResult::exhausted)
      .def_readonly("k_requested", &SampleResult::k_requested)
      .def_readonly("k_returned", &SampleResult::k_returned)
      .def_readonly("master_checksum", &SampleResult::master_checksum)
      .def_property_readonly("mode", [](const SampleResult& s) { return std::string(to_string(s.mode)); })
      .def_property_readonly("predicate", [](const SampleResult& s) { return s.predicate.to_string(); })
      .def_property_readonly("weight", [](const SampleResult& s) { return s.weight_spec.to_string(); })
      .def("__len__", [](const SampleResult& s) { return s.entries.size(); })
      .def("__eq__", [](const SampleResult& a, const SampleResult& b) { return a == b; })
      .def("to_text",
           [](const SampleResult& s) {
             std::ostringstream out;
             write_sample(out, s);
             return out.str();
           })
      .def_static("from_text",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return read_sample(in);
                  })
      .def("save", [](const SampleResult& s, const std::filesystem::path& p) { save_sample(s, p); })
      .def_static("load", &load_sample, py::arg("path"));

  m.def(
      "sample",
      [](const MasterSample& master, std::size_t k, const std::string& predicate, bool cost_limited) {
        const auto pred = Predicate::parse(predicate);
        return cost_limited ? sample_cost_limited(master, pred, k) : sample_by_predicate(master, pred, k);
      },
      py::arg("master"), py::arg("k"), py::arg("predicate") = "true", py::arg("cost_limited") = false);
  m.def(
      "extend",
      [](const MasterSample& master, const SampleResult& prev, std::size_t j,
         std::optional<std::string> predicate) {
        return predicate ? extend_sample(master, prev, Predicate::parse(*predicate), j)
                         : extend_sample(master, prev, j);
      },
      py::arg("master"), py::arg("sample"), py::arg("j"), py::arg("predicate") = py::none());

  m.def(
      "subset_sum",
      [](const SampleResult& s, const std::string& feature, const std::string& where) {
        return subset_sum(s, feature, Predicate::parse(where));
      },
      py::arg("sample"), py::arg("feature"), py::arg("where") = "true");
  m.def(
      "subset_count", [](const SampleResult& s, const std::string& where) { return subset_count(s, Predicate::parse(where)); },
      py::arg("sample"), py::arg("where") = "true");
  m.def(
      "ordinary_cdf", [](const SampleResult& s, const std::string& v) { return cdf_points(ordinary_cdf(s, v)); },
      py::arg("sample"), py::arg("variable"));
  m.def(
      "mass_distribution",
      [](const SampleResult& s, const std::string& mass, const std::string& by) {
        return mass_points(mass_distribution(s, mass, by));
      },
      py::arg("sample"), py::arg("mass"), py::arg("by"));

  m.def(
      "generate_nodes",
      [](std::size_t n, std::uint64_t seed, std::optional<std::string> config_json) {
        auto cfg = config_json ? SynthConfig::from_json(*config_json) : SynthConfig{};
        cfg.n_nodes = n;
        cfg.seed = seed;
        cfg.validate();
        py::gil_scoped_release release;
        return generate_nodes(cfg);
      },
      py::arg("n"), py::arg("seed"), py::arg("config") = py::none());
  m.def(
      "generate_links",
      [](const std::vector<Record>& nodes, std::size_t n, std::uint64_t seed) {
        py::gil_scoped_release release;
        return generate_links(nodes, n, seed);
      },
      py::arg("nodes"), py::arg("n"), py::arg("seed"));
  m.def(
      "true_cdf", [](const std::vector<Record>& r, const std::string& v) { return cdf_points(true_cdf(r, v)); },
      py::arg("records"), py::arg("variable"));
  m.def(
      "true_mass",
      [](const std::vector<Record>& r, const std::string& mass, const std::string& by) {
        return mass_points(true_mass(r, mass, by));
      },
      py::arg("records"), py::arg("mass"), py::arg("by"));
  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); });

  m.def(
      "ks_cdf",
      [](const std::vector<std::pair<double, double>>& est, const std::vector<std::pair<double, double>>& truth) {
        return ks_statistic(std::span<const CdfPoint>(to_cdf(est)), std::span<const CdfPoint>(to_cdf(truth)));
      },
      py::arg("estimate"), py::arg("truth"));
  m.def(
      "ks_mass",
      [](const std::vector<std::tuple<double, double, double>>& est,
         const std::vector<std::tuple<double, double, double>>& truth) {
        return ks_statistic(std::span<const MassPoint>(to_mass(est)), std::span<const MassPoint>(to_mass(truth)));
      },
      py::arg("estimate"), py::arg("truth"));

  m.def(
      "run_eval",
      [](const std::vector<Record>& records, std::size_t runs, std::size_t k, std::uint64_t seed,
         std::size_t threads) {
        if (records.empty()) throw Error(ErrorCode::EmptySample, "eval needs a nonempty dataset");
        auto spec = records.front().kind == RecordKind::link ? link_eval_spec(runs, k, seed)
                                                             : node_eval_spec(runs, k, seed);
        spec.threads = threads;
        KsTable table;
        {
          py::gil_scoped_release release;
          table = run_eval(records, spec);
        }
        py::list out;
        for (const auto& c : table.cells) {
          py::dict d;
          d["weight"] = c.weight.to_string();
          d["variable"] = c.target.variable;
          d["by"] = c.target.by ? py::object(py::str(*c.target.by)) : py::object(py::none());
          d["median_ks"] = c.median_ks;
          d["per_run"] = c.per_run;
          out.append(d);
        }
        return out;
      },
      py::arg("records"), py::arg("runs") = 20, py::arg("k") = 1000, py::arg("seed") = 0, py::arg("threads") = 1);
}
