#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "pathkg/dataset.hpp"
#include "pathkg/embedding.hpp"
#include "pathkg/errors.hpp"
#include "pathkg/evaluator.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/path.hpp"
#include "pathkg/sampler.hpp"
#include "pathkg/stats.hpp"
#include "pathkg/synth.hpp"
#include "pathkg/text.hpp"
#include "pathkg/verbalizer.hpp"

namespace py = pybind11;
using namespace pathkg;

namespace {

EntityId entity_of(const KnowledgeGraph& kg, const std::string& key) {
  const auto e = kg.find_entity(key);
  if (!e) throw py::key_error("unknown entity '" + key + "'");
  return *e;
}

std::vector<std::string> serialize_all(const std::vector<Path>& paths, const KnowledgeGraph& kg) {
  std::vector<std::string> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(serialize_path(p, kg));
  return out;
}

StatementStyle style_of(const std::string& name) {
  if (name == "cjk") return StatementStyle::cjk();
  if (name == "latin") return StatementStyle::latin();
  throw ConfigError("unknown statement style '" + name + "' (cjk or latin)");
}

py::dict stats_dict(const DatasetStats& s) {
  py::dict d;
  d["triples"] = s.triples;
  d["relation_types"] = s.relation_types;
  d["entities"] = s.entities;
  if (s.paths) d["paths"] = *s.paths;
  if (s.avg_paths_per_query_relation) d["avg_paths_per_query_relation"] = *s.avg_paths_per_query_relation;
  if (s.avg_path_length) d["avg_path_length"] = *s.avg_path_length;
  if (s.max_path_length) d["max_path_length"] = *s.max_path_length;
  if (s.avg_positive_per_query_relation) {
    d["avg_positive_per_query_relation"] = *s.avg_positive_per_query_relation;
  }
  if (s.avg_negative_per_query_relation) {
    d["avg_negative_per_query_relation"] = *s.avg_negative_per_query_relation;
  }
  return d;
}

WalkConfig walk_config(std::uint32_t max_len, std::uint32_t walks, std::uint64_t seed,
                       std::size_t cap) {
  WalkConfig w;
  w.max_len = max_len;
  w.walks_per_pair = walks;
  w.seed = seed;
  w.path_cap = cap;
  validate(w);
  return w;
}

py::array_t<float> as_array(const std::vector<float>& v) {
  const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(v.size())};
  const std::vector<py::ssize_t> strides{static_cast<py::ssize_t>(sizeof(float))};
  return py::array_t<float>(shape, strides, v.data());
}

}  // namespace

PYBIND11_MODULE(_pathkg, m) {
  m.doc() = "Path-based knowledge graph completion toolkit";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<FormatError>(m, "FormatError", error);
  py::register_exception<ConfigError>(m, "ConfigError", error);
  py::register_exception<SamplingError>(m, "SamplingError", error);
  py::register_exception<MissingEmbeddingError>(m, "MissingEmbeddingError", error);
  py::register_exception<IoError>(m, "IoError", error);

  py::class_<KnowledgeGraph, std::shared_ptr<KnowledgeGraph>>(m, "Graph")
      .def_property_readonly("entity_count", &KnowledgeGraph::entity_count)
      .def_property_readonly("relation_count", &KnowledgeGraph::relation_count)
      .def_property_readonly("base_relation_count", &KnowledgeGraph::base_relation_count)
      .def_property_readonly("has_inverses", &KnowledgeGraph::has_inverses)
      .def("entities", [](const KnowledgeGraph& kg) { return kg.entities().names(); })
      .def("relations", [](const KnowledgeGraph& kg) { return kg.relations().names(); })
      .def("entity_name",
           [](const KnowledgeGraph& kg, const std::string& key) {
             return kg.entity_name(entity_of(kg, key));
           })
      .def("triples",
           [](const KnowledgeGraph& kg) {
             std::vector<std::tuple<std::string, std::string, std::string>> out;
             for (const auto& t : kg.triples()) {
               out.emplace_back(kg.entity_key(t.head), kg.relation_name(t.relation),
                                kg.entity_key(t.tail));
             }
             return out;
           })
      .def("with_inverses",
           [](const KnowledgeGraph& kg) { return std::make_shared<KnowledgeGraph>(with_inverses(kg)); })
      .def("stats", [](const KnowledgeGraph& kg) { return stats_dict(graph_stats(kg)); })
      .def("format_stats", [](const KnowledgeGraph& kg) { return format_stats(graph_stats(kg)); })
      .def("__repr__", [](const KnowledgeGraph& kg) {
        return "<pathkg.Graph entities=" + std::to_string(kg.entity_count()) +
               " relations=" + std::to_string(kg.relation_count()) +
               " triples=" + std::to_string(kg.triples().size()) + ">";
      });

  m.def(
      "load_graph",
      [](const std::string& triples, const std::string& meta, bool inverses) {
        auto kg = load_graph_files(triples, meta);
        if (inverses) kg = with_inverses(kg);
        return std::make_shared<KnowledgeGraph>(std::move(kg));
      },
      py::arg("triples"), py::arg("meta") = "", py::arg("inverses") = false,
      "Load a triples TSV (and optional meta TSV).");

  m.def(
      "enumerate_paths",
      [](const KnowledgeGraph& kg, const std::string& source, const std::string& target,
         std::uint32_t max_len) {
        return serialize_all(enumerate_paths(kg, entity_of(kg, source), entity_of(kg, target), max_len),
                             kg);
      },
      py::arg("graph"), py::arg("source"), py::arg("target"), py::arg("max_len") = 3);

  m.def(
      "sample_paths",
      [](const KnowledgeGraph& kg, const std::string& source, const std::string& target,
         std::uint32_t max_len, std::uint32_t walks, std::uint64_t seed) {
        const auto w = walk_config(max_len, walks, seed, 200);
        py::gil_scoped_release release;
        auto paths = sample_paths(kg, entity_of(kg, source), entity_of(kg, target), w);
        py::gil_scoped_acquire acquire;
        return serialize_all(paths, kg);
      },
      py::arg("graph"), py::arg("source"), py::arg("target"), py::arg("max_len") = 3,
      py::arg("walks") = 1000, py::arg("seed") = 0,
      "Random-walk paths as `e0|r1|e1|...` strings, sorted.");

  m.def(
      "path_statement",
      [](const KnowledgeGraph& kg, const std::string& templates, const std::string& path,
         const std::string& style) {
        const auto set = load_template_file(templates, kg);
        return path_statement(parse_path(path, kg), kg, set, style_of(style)).text;
      },
      py::arg("graph"), py::arg("templates"), py::arg("path"), py::arg("style") = "cjk");

  m.def(
      "entity_statement",
      [](const KnowledgeGraph& kg, const std::string& key, const std::string& style) {
        return entity_statement(kg, entity_of(kg, key), style_of(style)).text;
      },
      py::arg("graph"), py::arg("entity"), py::arg("style") = "cjk");

  m.def("statement_key", [](const std::string& text) { return text::fnv1a64(text); },
        py::arg("text"), "64-bit statement key of a UTF-8 statement.");

  m.def(
      "hash_encode",
      [](const std::string& text, std::uint32_t dim, std::uint64_t seed) {
        return as_array(hash_encode(text, dim, seed));
      },
      py::arg("text"), py::arg("dim"), py::arg("seed") = 0);

  m.def(
      "write_pemb",
      [](const std::string& path, const std::vector<std::uint64_t>& keys,
         py::array_t<float, py::array::c_style | py::array::forcecast> vectors) {
        if (vectors.ndim() != 2 || static_cast<std::size_t>(vectors.shape(0)) != keys.size()) {
          throw ConfigError("vectors must be a (len(keys), dim) array");
        }
        const auto dim = static_cast<std::uint32_t>(vectors.shape(1));
        TextEmbeddingStore store(dim);
        for (std::size_t i = 0; i < keys.size(); ++i) {
          store.add(keys[i], std::span<const float>(vectors.data(static_cast<py::ssize_t>(i), 0), dim));
        }
        write_store_file(path, store);
      },
      py::arg("path"), py::arg("keys"), py::arg("vectors"));

  m.def(
      "read_pemb",
      [](const std::string& path) {
        const auto store = read_store_file(path);
        py::array_t<float> vectors({static_cast<py::ssize_t>(store.size()),
                                    static_cast<py::ssize_t>(store.dim())});
        auto* dst = vectors.mutable_data();
        for (const auto key : store.keys()) {
          const auto v = store.find(key);
          dst = std::copy(v.begin(), v.end(), dst);
        }
        return py::make_tuple(store.keys(), vectors);
      },
      py::arg("path"), "Returns (keys, float32 array of shape (n, dim)).");

  m.def(
      "average_precision",
      [](const std::vector<bool>& ranked) { return average_precision(ranked); },
      py::arg("ranked"), "AP of a best-first relevance list; None without positives.");

  m.def(
      "mean_average_precision",
      [](const std::vector<std::string>& relations, const std::vector<int>& labels,
         const std::vector<double>& scores) {
        if (relations.size() != labels.size() || relations.size() != scores.size()) {
          throw ConfigError("relations, labels and scores must have equal length");
        }
        SymbolTable names;
        std::vector<ScoredInstance> scored;
        for (std::size_t i = 0; i < relations.size(); ++i) {
          scored.push_back({static_cast<RelationId>(names.intern(relations[i])),
                            labels[i] != 0 ? Label::positive : Label::negative, scores[i],
                            std::to_string(i)});
        }
        const auto kg = KnowledgeGraph::build({}, names, {}, {}, false);
        const auto rep = mean_average_precision(scored, kg, "");
        py::dict per;
        for (const auto& row : rep.rows) per[py::str(row.name)] = row.ap;
        return py::make_tuple(rep.map, per);
      },
      py::arg("relations"), py::arg("labels"), py::arg("scores"),
      "Returns (MAP, {relation: AP}); ties keep input order.");

  m.def(
      "make_synth",
      [](const std::string& dir, std::uint64_t seed, std::uint32_t entities,
         std::uint32_t relations, std::uint32_t planted, std::uint32_t background) {
        SynthConfig cfg;
        cfg.seed = seed;
        cfg.entities = entities;
        cfg.relations = relations;
        cfg.planted = planted;
        cfg.background = background;
        const auto synth = make_synth_kg(cfg);
        write_synth_kg(synth, dir);
        return synth.graph.relation_name(synth.target);
      },
      py::arg("dir"), py::arg("seed") = 0, py::arg("entities") = 2000,
      py::arg("relations") = 10, py::arg("planted") = 1000, py::arg("background") = 4000,
      "Writes the benchmark files into `dir`; returns the target relation name.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"pathkg"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI subcommand in-process; returns (code, stdout, stderr).");
}
