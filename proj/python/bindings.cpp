#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qtomo/error.hpp"
#include "qtomo/exhaustive.hpp"
#include "qtomo/experiment.hpp"
#include "qtomo/generators.hpp"
#include "qtomo/topology_io.hpp"

namespace py = pybind11;
using namespace qtomo;

namespace {

std::vector<std::string> to_labels(const LogicalTree& tree, const JoiningConfig& config) {
  std::vector<std::string> out;
  for (EdgeId e : config.joins()) out.push_back(tree.edge_label(e).id);
  return out;
}

JoiningConfig from_labels(const LogicalTree& tree, const std::vector<std::string>& labels) {
  std::vector<EdgeLabel> wrapped;
  for (const std::string& l : labels) wrapped.push_back(EdgeLabel{l});
  return config_from_labels(tree, wrapped);
}

py::object labels_or_none(const LogicalTree& tree, const std::optional<JoiningConfig>& c) {
  if (!c) return py::none();
  return py::cast(to_labels(tree, *c));
}

py::list pair_list(std::span<const ReceiverPair> pairs) {
  py::list out;
  for (const ReceiverPair& p : pairs) out.append(py::make_tuple(p.first, p.second));
  return out;
}

py::dict row_dict(const SweepRow& row) {
  py::dict d;
  d["shape"] = std::string(to_string(row.shape));
  d["N"] = row.n;
  d["algorithm"] = std::string(to_string(row.algorithm));
  d["seed"] = row.seed;
  d["queries_used"] = row.queries_used;
  d["lower_bound"] = row.lower_bound;
  d["correct"] = row.correct;
  d["runtime_ms"] = row.runtime_ms;
  d["probe_queries"] = row.probe_queries;
  d["error"] = row.error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quartet-based inference of 2-by-N logical topologies";

  static py::exception<Error> error(m, "QtomoError", PyExc_RuntimeError);
  static py::exception<ParseError> parse_error(m, "ParseError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::object exc = py::reinterpret_borrow<py::object>(parse_error.ptr())(e.what());
      exc.attr("line") = e.line();
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(parse_error.ptr(), exc.ptr());
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<LogicalTree>(m, "LogicalTree")
      .def_property_readonly("receiver_count", &LogicalTree::receiver_count)
      .def_property_readonly("edge_count", &LogicalTree::edge_count)
      .def_property_readonly("receivers",
                             [](const LogicalTree& t) {
                               std::vector<std::string> out;
                               for (Receiver r = 0; r < t.receiver_count(); ++r) {
                                 out.push_back(t.receiver_name(r));
                               }
                               return out;
                             })
      .def("root_path",
           [](const LogicalTree& t, Receiver r) {
             if (r >= t.receiver_count()) throw py::index_error("receiver out of range");
             std::vector<std::string> out;
             for (EdgeId e : t.root_path(r)) out.push_back(t.edge_label(e).id);
             return out;
           })
      .def("__eq__", [](const LogicalTree& a, const LogicalTree& b) { return a == b; })
      .def("__repr__", [](const LogicalTree& t) {
        return "<LogicalTree N=" + std::to_string(t.receiver_count()) +
               " edges=" + std::to_string(t.edge_count()) + ">";
      });

  m.def("make_tree",
        [](const std::string& shape, std::size_t n) {
          return make_tree(spec_for_receivers(parse_shape(shape), n));
        },
        py::arg("shape"), py::arg("n"), "Generated tree with n receivers.");
  m.def("random_config",
        [](const LogicalTree& tree, std::uint64_t seed) {
          return to_labels(tree, random_config(tree, seed));
        },
        py::arg("tree"), py::arg("seed"));

  m.def("parse_topology",
        [](const std::string& text) {
          Topology t = parse_topology(text);
          py::object joins = labels_or_none(t.tree, t.config);
          return py::make_tuple(std::move(t.tree), joins);
        },
        py::arg("text"), "Returns (tree, joins or None).");
  m.def("load_topology",
        [](const std::string& path) {
          Topology t = load_topology(path);
          py::object joins = labels_or_none(t.tree, t.config);
          return py::make_tuple(std::move(t.tree), joins);
        },
        py::arg("path"));
  m.def("serialize_topology",
        [](const LogicalTree& tree, std::optional<std::vector<std::string>> joins) {
          std::optional<JoiningConfig> config;
          if (joins) config = from_labels(tree, *joins);
          return serialize_topology(tree, config);
        },
        py::arg("tree"), py::arg("joins") = py::none());

  m.def("is_valid",
        [](const LogicalTree& tree, const std::vector<std::string>& joins) {
          return is_valid_config(tree, from_labels(tree, joins));
        },
        py::arg("tree"), py::arg("joins"));
  m.def("quartet_type",
        [](const LogicalTree& tree, const std::vector<std::string>& joins, Receiver i,
           Receiver j) { return to_int(quartet_type(tree, from_labels(tree, joins), i, j)); },
        py::arg("tree"), py::arg("joins"), py::arg("i"), py::arg("j"));

  m.def("infer",
        [](const LogicalTree& tree, const std::vector<std::string>& joins,
           const std::string& alg, double noise_p, std::uint32_t repeats, std::uint64_t seed,
           bool propagate_equalities) {
          const GroundTruth gt(tree, from_labels(tree, joins));
          RunOptions options;
          options.algorithm = parse_algorithm(alg);
          options.noise = NoiseSpec{noise_p, repeats, seed};
          options.gbs.propagate_equalities = propagate_equalities;
          RunReport report;
          {
            py::gil_scoped_release release;
            report = run_inference(gt, options);
          }
          py::dict d;
          d["joins"] = to_labels(tree, report.result.joins);
          d["queries"] = report.result.queries_used;
          d["probe_queries"] = report.stats.total_queries;
          d["pairs"] = pair_list(report.result.queried_pairs());
          d["correct"] = report.correct;
          return d;
        },
        py::arg("tree"), py::arg("joins"), py::arg("alg") = "rea", py::arg("noise_p") = 0.0,
        py::arg("repeats") = 1, py::arg("seed") = 0, py::arg("propagate_equalities") = false,
        "Runs one inference against a simulated oracle holding `joins`.");

  m.def("lower_bound", &lower_bound, py::arg("n"));
  m.def("enumerate_valid_configs",
        [](const LogicalTree& tree) {
          std::vector<std::vector<std::string>> out;
          for (const JoiningConfig& c : enumerate_valid_configs(tree)) {
            out.push_back(to_labels(tree, c));
          }
          return out;
        },
        py::arg("tree"));
  m.def("min_quartets",
        [](const LogicalTree& tree, const std::vector<std::string>& joins) {
          const MinQuartets best = min_quartets(tree, from_labels(tree, joins));
          return py::make_tuple(best.count, pair_list(best.witness));
        },
        py::arg("tree"), py::arg("joins"), "Returns (count, witness pairs).");

  m.def("sweep",
        [](const std::string& shape, std::vector<std::size_t> sizes,
           std::vector<std::string> algorithms, std::size_t realizations,
           std::uint64_t seed, std::vector<std::uint64_t> seeds, double noise_p,
           std::uint32_t repeats, bool propagate_equalities, unsigned threads) {
          SweepConfig cfg;
          cfg.shape = parse_shape(shape);
          cfg.sizes = std::move(sizes);
          cfg.algorithms.clear();
          for (const std::string& a : algorithms) cfg.algorithms.push_back(parse_algorithm(a));
          cfg.realizations = realizations;
          cfg.base_seed = seed;
          cfg.seeds = std::move(seeds);
          cfg.noise = NoiseSpec{noise_p, repeats, 0};
          cfg.gbs.propagate_equalities = propagate_equalities;
          cfg.threads = threads;
          std::vector<SweepRow> rows;
          {
            py::gil_scoped_release release;
            rows = run_sweep(cfg);
          }
          py::list out;
          for (const SweepRow& row : rows) out.append(row_dict(row));
          return out;
        },
        py::arg("shape"), py::arg("sizes"),
        py::arg("algorithms") = std::vector<std::string>{"rea", "gbs"},
        py::arg("realizations") = 100, py::arg("seed") = 1,
        py::arg("seeds") = std::vector<std::uint64_t>{}, py::arg("noise_p") = 0.0,
        py::arg("repeats") = 1, py::arg("propagate_equalities") = false,
        py::arg("threads") = 1);
  m.def("csv_header", [] { return std::string(csv_header()); });
}
