#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "infops/attribution.hpp"
#include "infops/campaign.hpp"
#include "infops/centrality.hpp"
#include "infops/community.hpp"
#include "infops/diffusion.hpp"
#include "infops/error.hpp"
#include "infops/graph.hpp"
#include "infops/hawkes.hpp"
#include "infops/moderation.hpp"
#include "infops/objective.hpp"
#include "infops/opinion.hpp"
#include "infops/pipeline.hpp"

namespace py = pybind11;
using namespace infops;

namespace {

Graph graph_from_edges(std::size_t n, const std::vector<std::tuple<NodeId, NodeId, double>>& edges) {
  std::vector<Edge> es;
  es.reserve(edges.size());
  for (const auto& [s, d, r] : edges) es.push_back({s, d, r});
  return Graph(n, std::move(es));
}

StubbornSet stubborn_from(const std::map<NodeId, double>& pinned) { return StubbornSet{pinned}; }

}  // namespace

PYBIND11_MODULE(_infops, m) {
  m.doc() = "Network influence analysis, simulation and campaign/moderation optimization";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<Graph>(m, "Graph")
      .def(py::init(&graph_from_edges), py::arg("n"), py::arg("edges"),
           "Directed graph on nodes 0..n-1 from (src, dst, rate) triples.")
      .def_static("parse", &parse_edge_list, py::arg("text"))
      .def_static("load", &load_edge_list_file, py::arg("path"))
      .def_property_readonly("node_count", &Graph::node_count)
      .def_property_readonly("edge_count", &Graph::edge_count)
      .def("edges",
           [](const Graph& g) {
             std::vector<std::tuple<NodeId, NodeId, double>> out;
             for (const auto& e : g.edges()) out.emplace_back(e.src, e.dst, e.rate);
             return out;
           })
      .def("to_edge_list", &format_edge_list)
      .def("__len__", &Graph::node_count);

  m.def("planted_partition",
        [](std::size_t k, std::size_t size, double p_in, double p_out, std::uint64_t seed) {
          auto pg = generate_planted_partition(k, size, p_in, p_out, seed);
          return py::make_tuple(pg.graph, pg.truth.labels);
        },
        py::arg("k"), py::arg("size"), py::arg("p_in"), py::arg("p_out"), py::arg("seed") = 0);
  m.def("erdos_renyi", &generate_erdos_renyi, py::arg("n"), py::arg("p"), py::arg("seed") = 0,
        py::arg("directed") = false);
  m.def("complete_graph", &complete_graph, py::arg("n"), py::arg("rate") = 1.0);
  m.def("path_graph", &path_graph, py::arg("n"), py::arg("rate") = 1.0);

  // centrality: every measure returns the per-node score list
  m.def("degree_centrality", [](const Graph& g, const std::string& dir) {
    const auto d = dir == "in" ? DegreeDirection::In : dir == "out" ? DegreeDirection::Out : DegreeDirection::Total;
    return degree_centrality(g, d).values;
  }, py::arg("g"), py::arg("direction") = "total");
  m.def("h_index", [](const Graph& g) { return h_index(g).values; });
  m.def("closeness", [](const Graph& g) { return closeness(g).values; });
  m.def("betweenness", [](const Graph& g) { return betweenness(g).values; });
  m.def("bonacich", [](const Graph& g, double a, double b) { return bonacich(g, a, b).values; }, py::arg("g"),
        py::arg("alpha"), py::arg("beta") = 1.0);
  m.def("eigenvector_centrality", [](const Graph& g) { return eigenvector_centrality(g).values; });
  m.def("pagerank", [](const Graph& g, double d) { return pagerank(g, d).values; }, py::arg("g"),
        py::arg("damping") = 0.85);
  m.def("rumor_centrality",
        [](const Graph& g, const std::vector<NodeId>& infected) {
          const auto s = rumor_centrality(g, infected);
          return py::make_tuple(s.nodes, s.values);
        },
        py::arg("g"), py::arg("infected"), "Returns (nodes, log-counts).");

  // communities
  m.def("modularity", [](const Graph& g, const std::vector<int>& labels) {
    return modularity(g, Partition::from_labels(labels));
  });
  m.def("greedy_modularity", [](const Graph& g) { return greedy_modularity(g).labels; });
  m.def("spectral_clustering", [](const Graph& g, std::size_t k, std::uint64_t seed) {
    return spectral_clustering(g, k, seed).labels;
  }, py::arg("g"), py::arg("k"), py::arg("seed") = 0);
  m.def("select_k",
        [](const Graph& g, std::size_t kmin, std::size_t kmax, std::uint64_t seed) {
          const auto s = select_k(g, kmin, kmax, seed);
          return py::make_tuple(s.k, s.modularity, s.partition.labels);
        },
        py::arg("g"), py::arg("k_min"), py::arg("k_max"), py::arg("seed") = 0);
  m.def("nmi", [](const std::vector<int>& a, const std::vector<int>& b) {
    return normalized_mutual_information(Partition::from_labels(a), Partition::from_labels(b));
  });

  // diffusion
  m.def("expected_spread_ic",
        [](const Graph& g, double p, const std::vector<NodeId>& seeds, std::size_t reps, std::uint64_t seed) {
          const auto e = expected_spread(g, DiffusionParams::independent_cascade(g, p), seeds, reps, seed);
          return py::make_tuple(e.mean, e.std_error);
        },
        py::arg("g"), py::arg("p"), py::arg("seeds"), py::arg("replications") = 1000, py::arg("seed") = 0);
  m.def("simulate_ic",
        [](const Graph& g, double p, const std::vector<NodeId>& seeds, std::uint64_t seed) {
          return simulate_ic(g, DiffusionParams::independent_cascade(g, p), seeds, seed).activation_time;
        },
        py::arg("g"), py::arg("p"), py::arg("seeds"), py::arg("seed") = 0, "Activation step per node (None if never).");
  m.def("sir_ode",
        [](double beta, double gamma, double s0, double i0, double r0, double T, double dt) {
          std::vector<std::tuple<double, double, double, double>> out;
          for (const auto& p : simulate_sir_ode(beta, gamma, s0, i0, r0, T, dt)) out.emplace_back(p.t, p.s, p.i, p.r);
          return out;
        });
  m.def("simulate_hawkes",
        [](const Graph& g, double mu, double alpha, double beta, double T, std::uint64_t seed) {
          std::vector<std::pair<double, NodeId>> out;
          for (const auto& e : simulate_hawkes(g, {mu, alpha, beta}, T, seed).events) out.emplace_back(e.time, e.node);
          return out;
        },
        py::arg("g"), py::arg("mu"), py::arg("alpha"), py::arg("beta"), py::arg("T"), py::arg("seed") = 0);

  // opinions
  py::class_<ShiftFunction>(m, "Shift")
      .def_static("linear", &ShiftFunction::linear, py::arg("omega") = 1.0)
      .def_static("bounded", &ShiftFunction::bounded, py::arg("omega"), py::arg("epsilon"))
      .def("__call__", &ShiftFunction::operator());
  m.def("integrate",
        [](const Graph& g, const OpinionState& theta0, const ShiftFunction& shift, double T, double h,
           const std::map<NodeId, double>& stubborn, std::size_t sample_every) {
          IntegrationOptions opts;
          opts.h = h;
          opts.sample_every = sample_every;
          const auto traj = integrate(g, theta0, shift, stubborn_from(stubborn), {}, T, opts);
          return py::make_tuple(traj.times, traj.states);
        },
        py::arg("g"), py::arg("theta0"), py::arg("shift"), py::arg("T"), py::arg("h") = 0.01,
        py::arg("stubborn") = std::map<NodeId, double>{}, py::arg("sample_every") = 10);

  // campaigns, moderation, attribution
  m.def("greedy_seeds",
        [](const Graph& g, double p, std::size_t budget, std::size_t reps, std::uint64_t seed) {
          const auto s = greedy_seed_selection(g, DiffusionParams::independent_cascade(g, p), budget, reps, seed);
          return py::make_tuple(s.seeds, s.spread);
        },
        py::arg("g"), py::arg("p"), py::arg("budget"), py::arg("replications") = 1000, py::arg("seed") = 0);
  m.def("degree_discount", [](const Graph& g, std::size_t budget, double p) { return degree_discount(g, budget, p).seeds; });
  m.def("nudging_policy",
        [](const std::vector<double>& theta, const std::vector<NodeId>& targets, const ShiftFunction& shift,
           const std::vector<double>& weights, double previous, double lo, double hi) {
          return nudging_policy(theta, targets, shift, weights, previous, lo, hi);
        },
        py::arg("theta"), py::arg("targets"), py::arg("shift"), py::arg("weights"),
        py::arg("previous"), py::arg("lo") = 0.0, py::arg("hi") = 1.0);
  m.def("shadowban_step",
        [](const Graph& g, const std::vector<double>& theta, const ShiftFunction& shift, const std::string& objective,
           double budget) { return shadowban_step(g, theta, shift, Objective::parse(objective), budget).visibility; },
        py::arg("g"), py::arg("theta"), py::arg("shift"), py::arg("objective"), py::arg("budget"));
  m.def("shapley_exact",
        [](std::size_t n, const std::function<double(std::uint64_t)>& value) { return shapley_exact(n, value).values; },
        py::arg("n"), py::arg("value"), "value(mask) -> float, bit i of mask = actor i");
  m.def("shapley_mc",
        [](std::size_t n, const std::function<double(std::uint64_t)>& value, std::size_t samples, std::uint64_t seed) {
          const auto r = shapley_mc(n, value, samples, seed);
          return py::make_tuple(r.values, r.std_error);
        },
        py::arg("n"), py::arg("value"), py::arg("samples"), py::arg("seed") = 0);

  // pipeline
  m.def("validate_config", [](const std::string& text) { return validate(RunConfig::parse(text)); });
  m.def("run_pipeline",
        [](const std::string& text) {
          const auto r = run(RunConfig::parse(text));
          std::vector<std::pair<std::string, std::string>> files;
          for (const auto& a : r.artifacts) files.emplace_back(a.path, a.sha256);
          return py::make_tuple(r.exit_code, files, r.violations, r.error);
        },
        py::arg("config_json"), "Returns (exit_code, [(path, sha256)], violations, error).");
  m.def("sha256_hex", [](const std::string& s) { return sha256_hex(s); });
}
