#include "graphfilt/apps.hpp"
#include "graphfilt/conv_filter.hpp"
#include "graphfilt/filterbank.hpp"
#include "graphfilt/graph.hpp"
#include "graphfilt/io.hpp"
#include "graphfilt/regularized.hpp"
#include "graphfilt/spectral.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace graphfilt;

PYBIND11_MODULE(_core, m) {
  m.doc() = "graph signal filtering core";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<Graph>(m, "Graph")
      .def(py::init([](const std::vector<std::tuple<Index, Index, double>>& edges, bool directed,
                       std::optional<Index> n) {
             std::vector<Edge> e;
             for (const auto& [s, d, w] : edges) e.push_back({s, d, w});
             return Graph::from_edge_list(e, directed, n);
           }),
           py::arg("edges"), py::arg("directed") = false, py::arg("node_count") = py::none())
      .def_property_readonly("node_count", &Graph::node_count)
      .def_property_readonly("directed", &Graph::directed)
      .def("edges", [](const Graph& g) {
        std::vector<std::tuple<Index, Index, double>> out;
        for (const Edge& e : g.edges()) out.emplace_back(e.src, e.dst, e.weight);
        return out;
      })
      .def("adjacency", [](const Graph& g) { return Matrix(g.adjacency()); })
      .def("to_json", [](const Graph& g) { return to_json(g).dump(); })
      .def_static("from_json", [](const std::string& s) { return graph_from_json(Json::parse(s)); });

  m.def("path_graph", &path_graph, py::arg("n"), py::arg("weight") = 1.0);
  m.def("cycle_graph", &cycle_graph, py::arg("n"));
  m.def("complete_graph", &complete_graph, py::arg("n"), py::arg("weight") = 1.0);
  m.def("stochastic_block_model",
        [](const std::vector<Index>& sizes, double p_in, double p_out, std::uint64_t seed) {
          Rng rng(seed);
          return stochastic_block_model(sizes, p_in, p_out, rng);
        },
        py::arg("sizes"), py::arg("p_in"), py::arg("p_out"), py::arg("seed") = 0);

  py::class_<ShiftOperator>(m, "ShiftOperator")
      .def_static("custom", [](const Matrix& d) { return ShiftOperator::custom(d); })
      .def("dense", &ShiftOperator::dense)
      .def_property_readonly("kind", [](const ShiftOperator& s) { return std::string(to_string(s.kind())); })
      .def_property_readonly("symmetric", &ShiftOperator::symmetric)
      .def_property_readonly("size", &ShiftOperator::size)
      .def("apply", [](const ShiftOperator& s, const Vector& x) { return s.apply(x); });

  m.def("gso", [](const Graph& g, const std::string& kind) { return gso(g, gso_kind_from_string(kind)); },
        py::arg("graph"), py::arg("kind") = "laplacian");

  m.def("eigenvalues", [](const ShiftOperator& s) { return CVector(eigendecompose(s).eigenvalues()); });
  m.def("gft", [](const ShiftOperator& s, const Vector& x) { return gft(eigendecompose(s), x); });

  py::class_<ConvFilter>(m, "ConvFilter")
      .def(py::init<Vector>(), py::arg("taps"))
      .def_static("chebyshev", &ConvFilter::chebyshev, py::arg("coeffs"), py::arg("lambda_max"))
      .def_property_readonly("taps", &ConvFilter::taps)
      .def_property_readonly("order", &ConvFilter::order)
      .def("response", py::overload_cast<double>(&ConvFilter::response, py::const_))
      .def("apply", [](const ConvFilter& f, const ShiftOperator& s, const Vector& x) { return apply(f, s, x); })
      .def("to_json", [](const ConvFilter& f) { return to_json(FilterSpec(f)).dump(); });

  m.def("design_chebyshev", [](const std::function<double(double)>& fn, double lmax, Index k) {
    return design_chebyshev(fn, lmax, k);
  }, py::arg("target"), py::arg("lambda_max"), py::arg("K"));
  m.def("design_ls", py::overload_cast<const Vector&, const Vector&, Index>(&design_ls_universal),
        py::arg("lambdas"), py::arg("targets"), py::arg("K"));

  m.def("smooth_denoise", &smooth_denoise, py::arg("laplacian"), py::arg("x"), py::arg("gamma"), py::arg("eps") = 0.0,
        py::arg("beta") = 1.0);

  m.def("parseval_deviation", [](Index channels, double lo, double hi, const std::string& kind) {
    const FilterBank b = design_tight_frame(
        channels, lo, hi, kind == "sgwt" ? TightFrameKind::sgwt_warped : TightFrameKind::half_cosine_translates);
    return check_parseval(b, lo, hi);
  }, py::arg("channels"), py::arg("lo"), py::arg("hi"), py::arg("kind") = "half_cosine");

  m.def("spectral_cluster", [](const Graph& g, Index k, const std::string& mode, std::uint64_t seed) {
    return spectral_cluster(g, k, mode == "filtered" ? ClusterMode::filtered : ClusterMode::exact, seed).labels;
  }, py::arg("graph"), py::arg("k"), py::arg("mode") = "exact", py::arg("seed") = 0);
  m.def("adjusted_rand_index", &adjusted_rand_index);
}
