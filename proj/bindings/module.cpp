// Python surface: the merged sketch with its estimators, config parsing,
// and the simulate / oracle / bench drivers returning their text outputs.
// Heavy calls release the GIL.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sketchloop/bench.hpp"
#include "sketchloop/config.hpp"
#include "sketchloop/gsum.hpp"
#include "sketchloop/merged_sketch.hpp"
#include "sketchloop/replay.hpp"
#include "sketchloop/snapshot.hpp"

namespace py = pybind11;
using namespace sketchloop;

namespace {

RunConfig config_for(const std::string& text, std::optional<uint64_t> seed) {
  RunConfig cfg = parse_config(text);
  if (seed) {
    cfg.seed = *seed;
    cfg.resolve();
  }
  return cfg;
}

std::vector<std::pair<uint64_t, int64_t>> hh_pairs(const std::vector<HeavyHitter>& hh) {
  std::vector<std::pair<uint64_t, int64_t>> out;
  out.reserve(hh.size());
  for (const auto& e : hh) out.emplace_back(e.key, e.estimate);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "sketchloop core bindings";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SketchGeometry>(m, "Geometry")
      .def(py::init([](uint32_t depth, uint32_t width, uint32_t levels, uint32_t dimensions,
                       uint32_t track_k, uint64_t seed) {
             SketchGeometry g{depth, width, levels, dimensions, track_k, seed};
             g.validate();
             return g;
           }),
           py::arg("depth") = 5, py::arg("width") = 2048, py::arg("levels") = 16,
           py::arg("dimensions") = 1, py::arg("track_k") = 64, py::arg("seed") = 0)
      .def_readonly("depth", &SketchGeometry::depth)
      .def_readonly("width", &SketchGeometry::width)
      .def_readonly("levels", &SketchGeometry::levels)
      .def_readonly("dimensions", &SketchGeometry::dimensions)
      .def_readonly("track_k", &SketchGeometry::track_k)
      .def_readonly("seed", &SketchGeometry::seed)
      .def("__repr__", [](const SketchGeometry& g) {
        std::ostringstream s;
        s << "Geometry(depth=" << g.depth << ", width=" << g.width << ", levels=" << g.levels
          << ", dimensions=" << g.dimensions << ", track_k=" << g.track_k << ", seed=" << g.seed
          << ")";
        return s.str();
      });

  py::class_<MergedUnivSketch>(m, "Sketch")
      .def(py::init<const SketchGeometry&, double, uint64_t>(), py::arg("geometry"),
           py::arg("sampling_p") = 1.0, py::arg("sampling_seed") = 0)
      .def_property_readonly("geometry", &MergedUnivSketch::geometry)
      .def_property_readonly("sampling_p", &MergedUnivSketch::sampling_p)
      .def("update", &MergedUnivSketch::update, py::arg("dim"), py::arg("key"),
           py::arg("weight") = 1)
      .def("estimate", &MergedUnivSketch::estimate, py::arg("dim"), py::arg("key"))
      .def("entropy", &MergedUnivSketch::entropy_bits, py::arg("dim"))
      .def("cardinality",
           [](const MergedUnivSketch& sk, uint32_t dim) {
             return sk.gsum(dim, GsumKind::cardinality());
           },
           py::arg("dim"))
      .def("heavy_hitters",
           [](const MergedUnivSketch& sk, uint32_t dim, double threshold) {
             return hh_pairs(sk.heavy_hitters(dim, threshold));
           },
           py::arg("dim"), py::arg("threshold"),
           "Keys whose estimate reaches threshold * stream length, as (key, estimate) "
           "pairs in canonical order (estimate desc, key asc).")
      .def("stream_length", &MergedUnivSketch::stream_length, py::arg("dim"))
      .def("merge", &MergedUnivSketch::merge, py::arg("other"),
           "Adds the other sketch's counters and trackers; geometry and seed must match.")
      .def("to_bytes",
           [](const MergedUnivSketch& sk) {
             auto bytes = serialize_sketch(sk, {});
             return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
           })
      .def_static("from_bytes", [](const py::bytes& blob) {
        std::string_view view = blob;
        std::vector<DimHistogram> hists;
        return deserialize_sketch(
            std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(view.data()), view.size()),
            hists);
      });

  py::class_<RunConfig>(m, "Config")
      .def_readonly("switches", &RunConfig::switches)
      .def_readonly("nodes_per_switch", &RunConfig::nodes_per_switch)
      .def_readonly("records", &RunConfig::records)
      .def_readonly("epoch_records", &RunConfig::epoch_records)
      .def_readonly("seed", &RunConfig::seed)
      .def_readonly("sync_period", &RunConfig::sync_period)
      .def_readonly("hh_threshold", &RunConfig::hh_threshold)
      .def_readonly("geometry", &RunConfig::geometry)
      .def("epochs", &RunConfig::epochs)
      .def("records_per_epoch", &RunConfig::records_per_epoch);

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config_file", &load_config_file, py::arg("path"));

  m.def(
      "simulate",
      [](const std::string& config_text, std::optional<uint64_t> seed) {
        RunConfig cfg = config_for(config_text, seed);
        std::ostringstream out;
        {
          py::gil_scoped_release release;
          run_simulate(cfg, out);
        }
        return out.str();
      },
      py::arg("config_text"), py::arg("seed") = py::none(),
      "Runs the closed loop on the configured workload; returns the trace CSV.");

  m.def(
      "oracle",
      [](const std::string& config_text, std::optional<uint64_t> seed) {
        RunConfig cfg = config_for(config_text, seed);
        std::ostringstream out;
        {
          py::gil_scoped_release release;
          run_oracle(cfg, out);
        }
        return out.str();
      },
      py::arg("config_text"), py::arg("seed") = py::none(),
      "Replays the identical stream with exact counting; returns the oracle CSV.");

  m.def(
      "manifest",
      [](const std::string& config_text, const std::string& command,
         std::optional<uint64_t> seed) {
        return manifest_json(config_for(config_text, seed), command);
      },
      py::arg("config_text"), py::arg("command") = "simulate", py::arg("seed") = py::none());

  m.def(
      "sketch_bench",
      [](uint64_t seed) {
        BenchReport r = [&] {
          py::gil_scoped_release release;
          return run_sketch_bench(seed);
        }();
        std::ostringstream text;
        write_bench_report(r, text);
        py::dict d;
        d["seed"] = r.seed;
        d["hash_ratio"] = r.hash_ratio;
        d["row_hash_ratio"] = r.row_hash_ratio;
        d["rel_are_ratio"] = r.rel_are_ratio;
        d["unbias_worst_dev"] = r.unbias_worst_dev;
        d["merged_err"] = r.merged_err;
        d["separate_err"] = r.separate_err;
        d["report"] = text.str();
        return d;
      },
      py::arg("seed") = 1,
      "Runs the sampling / shared-table microbenchmark; returns headline numbers and the "
      "formatted report.");
}
