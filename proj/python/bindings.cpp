// Python bindings: datasets as float32 numpy arrays, graph build and
// search, the workload and cost model, and persisted run artifacts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "dqf/harness.hpp"
#include "dqf/index_io.hpp"
#include "dqf/synthetic.hpp"

namespace py = pybind11;
using namespace dqf;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

VectorDataset to_dataset(const FloatArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
  const auto* p = a.data();
  return VectorDataset(static_cast<std::size_t>(a.shape(1)),
                       std::vector<float>(p, p + a.size()));
}

py::array_t<float> to_array(const VectorDataset& ds) {
  py::array_t<float> out({ds.count(), ds.dim()});
  std::copy(ds.data().begin(), ds.data().end(), out.mutable_data());
  return out;
}

std::span<const float> as_query(const FloatArray& q) {
  if (q.ndim() != 1) throw std::invalid_argument("expected a 1-d query");
  return {q.data(), static_cast<std::size_t>(q.size())};
}

py::tuple results(const SearchOutcome& out) {
  py::list ids, dists;
  for (const auto& n : out.results) {
    ids.append(n.id);
    dists.append(n.distance);
  }
  return py::make_tuple(ids, dists, out.trace.dist_count);
}

}  // namespace

PYBIND11_MODULE(dqf, m) {
  m.doc() = "Dual hot/full graph index with learned early termination";

  py::class_<VectorDataset>(m, "Dataset")
      .def(py::init(&to_dataset), py::arg("vectors"))
      .def_property_readonly("count", &VectorDataset::count)
      .def_property_readonly("dim", &VectorDataset::dim)
      .def("digest", &VectorDataset::digest)
      .def("numpy", &to_array);

  m.def("load_fvecs", &load_fvecs, py::arg("path"));
  m.def("write_fvecs", &write_fvecs, py::arg("path"), py::arg("dataset"));
  m.def(
      "gaussian_mixture",
      [](std::size_t count, std::size_t dim, std::size_t clusters, std::uint64_t seed) {
        MixtureParams p;
        p.count = count;
        p.dim = dim;
        p.clusters = clusters;
        p.seed = seed;
        return gaussian_mixture(p);
      },
      py::arg("count"), py::arg("dim"), py::arg("clusters") = 1, py::arg("seed") = 1);

  m.def(
      "brute_force_knn",
      [](const VectorDataset& ds, const FloatArray& q, std::size_t k) {
        SearchOutcome out;
        out.results = brute_force_knn(ds, as_query(q), k);
        return results(out);
      },
      py::arg("dataset"), py::arg("query"), py::arg("k"));

  py::class_<BuildParams>(m, "BuildParams")
      .def(py::init<>())
      .def_readwrite("knng_k", &BuildParams::knng_k)
      .def_readwrite("nn_descent_iters", &BuildParams::nn_descent_iters)
      .def_readwrite("angle", &BuildParams::angle_threshold_degrees)
      .def_readwrite("max_degree", &BuildParams::max_degree)
      .def_readwrite("seed", &BuildParams::seed);

  py::class_<FullIndex>(m, "FullIndex")
      .def_property_readonly("entry_points", [](const FullIndex& f) { return f.entry_points; })
      .def("neighbors",
           [](const FullIndex& f, NodeId u) {
             if (u >= f.graph.node_count()) throw py::index_error("node out of range");
             const auto nb = f.graph.neighbors(u);
             return std::vector<NodeId>(nb.begin(), nb.end());
           })
      .def_property_readonly("node_count", [](const FullIndex& f) { return f.graph.node_count(); })
      .def_property_readonly("edge_count", [](const FullIndex& f) { return f.graph.edge_count(); });

  m.def("build_full_index", &build_full_index, py::arg("dataset"), py::arg("params") = BuildParams{},
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "beam_search",
      [](const FullIndex& f, const VectorDataset& ds, const FloatArray& q, std::size_t k, std::size_t l) {
        return results(beam_search(f.graph, f.entry_points, ds, as_query(q), k, l));
      },
      py::arg("index"), py::arg("dataset"), py::arg("query"), py::arg("k") = 10, py::arg("l") = 100);

  m.def(
      "zipf_sample",
      [](double beta, std::size_t universe, std::size_t count, std::uint64_t seed) {
        ZipfParams p;
        p.beta = beta;
        p.universe = universe;
        p.seed = seed;
        return zipf_sample(p, count);
      },
      py::arg("beta"), py::arg("universe"), py::arg("count"), py::arg("seed") = 7);
  m.def("p_miss", &p_miss, py::arg("index_ratio"), py::arg("n"), py::arg("beta"));
  m.def("complexity", &complexity, py::arg("index_ratio"), py::arg("n"), py::arg("beta"));
  m.def("optimal_index_ratio", &optimal_index_ratio, py::arg("n"), py::arg("beta"));

  py::enum_<Verdict>(m, "Verdict").value("Continue", Verdict::Continue).value("Terminate", Verdict::Terminate);

  py::class_<DecisionTree>(m, "DecisionTree")
      .def_static("load", &DecisionTree::load, py::arg("path"))
      .def_static("from_json", [](const std::string& s) { return DecisionTree::from_json(s); })
      .def("to_json", &DecisionTree::to_json)
      .def_property_readonly("depth", &DecisionTree::depth)
      .def("feature_importance",
           [](const DecisionTree& t) {
             py::dict out;
             const auto imp = t.feature_importance();
             for (std::size_t i = 0; i < kFeatureCount; ++i) out[py::str(std::string(kFeatureNames[i]))] = imp[i];
             return out;
           })
      .def("predict", [](const DecisionTree& t, const std::vector<double>& f) {
        if (f.size() != kFeatureCount) throw std::invalid_argument("expected six features");
        FeatureVector v;
        v.hot_first = f[0];
        v.hot_first_div_kth = f[1];
        v.full_first = f[2];
        v.full_first_div_kth = f[3];
        v.dist_count = static_cast<std::uint64_t>(f[4]);
        v.update_count = static_cast<std::uint64_t>(f[5]);
        return t.predict(v);
      });

  m.def(
      "analyze",
      [](std::size_t n, double beta, std::size_t grid) {
        std::ostringstream out;
        const auto r = cmd_analyze(n, beta, grid, out);
        py::dict d;
        d["closed_form"] = r.closed_form;
        d["grid_argmin"] = r.grid_argmin;
        d["complexity_at_one"] = r.complexity_at_one;
        d["text"] = out.str();
        return d;
      },
      py::arg("n"), py::arg("beta"), py::arg("grid") = 10000);

  py::register_exception<LoadError>(m, "LoadError", PyExc_IOError);
}
