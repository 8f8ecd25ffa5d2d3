#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pathkg/dataset.hpp"
#include "pathkg/embedding.hpp"
#include "pathkg/errors.hpp"
#include "pathkg/evaluator.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/model.hpp"
#include "pathkg/parallel.hpp"
#include "pathkg/sampler.hpp"
#include "pathkg/stats.hpp"
#include "pathkg/synth.hpp"
#include "pathkg/text.hpp"
#include "pathkg/trainer.hpp"
#include "pathkg/verbalizer.hpp"

namespace pathkg::cli {
namespace {

constexpr const char* kFormats = R"(File formats (UTF-8, TAB separated, one record per line):
  triples      head  relation  tail
  meta         entity  name  type,type,...  [category  [description]]
  templates    relation  surface-with-{head}-and-{tail}
  paths        source  target  e0|r1|e1|...;e0|r1|...   ('-' = none)
  instances    label(1|0)  relation  head  tail  paths
  statements   key-hex  text
  report       relation  AP  pos  neg ... then MAP  value
  train log    epoch  loss  dev_accuracy
  PEMB         binary: "PEMB" u16 version, u32 dim, u64 count, (u64 key, dim x f32)*
Inverse relations are named inv:<relation>. '|' and ';' are reserved in names.
--config FILE reads `key = value` lines (option names, '-' or '_'); flags win.

Exit codes: 0 ok, 1 failure, 2 usage, 3 I/O, 4 format, 5 config,
            6 sampling, 7 missing embedding.
Errors print one line: error<TAB>code<TAB>kind<TAB>message)";

// `--long-name,--long_name` so config files may use either spelling.
std::string flag(const std::string& name) {
  std::string alias = name;
  for (auto& c : alias) {
    if (c == '-') c = '_';
  }
  return alias == name ? "--" + name : "--" + name + ",--" + alias;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

struct GraphArgs {
  std::string triples;
  std::string meta;

  void add(CLI::App* app) {
    app->add_option("--triples", triples, "triples TSV")->required();
    app->add_option("--meta", meta, "entity metadata TSV");
  }
  KnowledgeGraph load() const { return load_graph_files(triples, meta); }
};

void add_walk_options(CLI::App* app, WalkConfig& walk) {
  app->add_option(flag("max-len"), walk.max_len, "maximum path length")
      ->capture_default_str();
  app->add_option(flag("walks"), walk.walks_per_pair, "random walks per entity pair")
      ->capture_default_str();
  app->add_option(flag("path-cap"), walk.path_cap, "paths kept per instance")
      ->capture_default_str();
  app->add_option(flag("walk-seed"), walk.seed, "walk seed")->capture_default_str();
}

struct TextArgs {
  std::string templates;
  std::string embeddings;
  std::string lookup = "synthetic";
  std::uint64_t lookup_seed = 0;
  std::uint32_t text_dim = 768;
  std::string style = "cjk";

  void add(CLI::App* app, bool with_seed) {
    app->add_option("--templates", templates, "relation templates TSV");
    app->add_option("--embeddings", embeddings, "PEMB statement vectors");
    app->add_option("--lookup", lookup, "embedding lookup on a miss")
        ->check(CLI::IsMember({"strict", "synthetic"}))
        ->capture_default_str();
    if (with_seed) {
      app->add_option(flag("lookup-seed"), lookup_seed, "synthetic lookup seed")
          ->capture_default_str();
    }
    app->add_option(flag("text-dim"), text_dim, "text width when no PEMB file is given")
        ->capture_default_str();
    app->add_option("--style", style, "statement punctuation")
        ->check(CLI::IsMember({"cjk", "latin"}))
        ->capture_default_str();
  }

  StatementStyle statement_style() const {
    return style == "latin" ? StatementStyle::latin() : StatementStyle::cjk();
  }
  LookupMode mode(std::uint64_t seed) const {
    return lookup == "strict" ? LookupMode::strict() : LookupMode::synthetic(seed);
  }
  TextEmbeddingStore store() const {
    if (!embeddings.empty()) return read_store_file(embeddings);
    if (lookup == "strict") throw ConfigError("strict lookup needs --embeddings");
    return TextEmbeddingStore(text_dim);
  }
  std::optional<TemplateSet> load_templates(const KnowledgeGraph& kg) const {
    if (templates.empty()) return std::nullopt;
    return load_template_file(templates, kg);
  }
};

std::vector<RelationId> resolve_relations(const KnowledgeGraph& kg,
                                          const std::vector<std::string>& names) {
  std::vector<RelationId> out;
  for (const auto& name : names) {
    const auto r = kg.find_relation(name);
    if (!r || kg.is_inverse(*r)) throw ConfigError("unknown relation '" + name + "'");
    out.push_back(*r);
  }
  return out;
}

EntityId resolve_entity(const KnowledgeGraph& kg, const std::string& key) {
  const auto e = kg.find_entity(key);
  if (!e) throw ConfigError("unknown entity '" + key + "'");
  return *e;
}

std::vector<QueryInstance> read_all(const std::vector<std::string>& files,
                                    const KnowledgeGraph& kg) {
  std::vector<QueryInstance> all;
  for (const auto& f : files) {
    auto part = read_instance_file(f, kg);
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return all;
}

std::vector<InstanceFeatures> features_of(const FeatureContext& ctx,
                                          std::span<const QueryInstance> instances) {
  std::vector<InstanceFeatures> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(ctx.features(inst));
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& csv, const char* what) {
  std::vector<T> out;
  if (csv.empty()) return out;
  for (const auto part : text::split(csv, ',')) {
    const auto v = text::parse_number<T>(text::trim(part));
    if (!v) throw ConfigError(std::string("bad ") + what + " value '" + std::string(part) + "'");
    out.push_back(*v);
  }
  return out;
}

// Loaded model plus everything scoring needs.
struct LoadedModel {
  KnowledgeGraph kg;
  ModelParams params;
  CheckpointInfo info;
  std::optional<TemplateSet> templates;
  TextEmbeddingStore store;
};

LoadedModel load_model(const GraphArgs& graph, const TextArgs& text,
                       const std::string& checkpoint) {
  LoadedModel m{with_inverses(graph.load()), {}, {}, std::nullopt, TextEmbeddingStore(0)};
  std::tie(m.params, m.info) = read_checkpoint_file(checkpoint);
  check_compatible(m.info, m.kg);
  m.templates = text.load_templates(m.kg);
  m.store = text.store();
  if (m.store.dim() != m.params.hp.H) {
    throw ConfigError("text width " + std::to_string(m.store.dim()) +
                      " does not match the checkpoint's H = " +
                      std::to_string(m.params.hp.H));
  }
  return m;
}

// Every long name of `opt`, with its leading dashes.
bool names_option(const CLI::Option& opt, std::string_view arg) {
  if (!arg.starts_with("-")) return false;
  const auto eq = arg.find('=');
  const auto name = arg.substr(0, eq);
  for (const auto& l : opt.get_lnames()) {
    if (name == "--" + l) return true;
  }
  for (const auto& s : opt.get_snames()) {
    if (name == "-" + s) return true;
  }
  return false;
}

// Expands `--config FILE` into `--key value` arguments placed right after
// the subcommand name, skipping options the command line already sets.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args.front());
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw IoError("cannot open " + *path);

  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = text::trim(text::strip_cr(line));
    if (content.empty() || content.front() == '#' || content.front() == ';') continue;
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) throw ParseError(*path, line_no, "expected key = value");
    std::string key(text::trim(content.substr(0, eq)));
    std::string value(text::trim(content.substr(eq + 1)));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    const auto* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw ConfigError(*path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    const bool on_command_line =
        std::any_of(args.begin() + 1, args.end(),
                    [&](const std::string& a) { return names_option(*opt, a); });
    if (on_command_line) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "on" || value == "yes") {
        extra.push_back("--" + key);
      }
      continue;
    }
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pathkg: path-based knowledge graph completion", "pathkg"};
  app.footer(kFormats);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  const auto configurable = [&](const char* name, const char* about) {
    auto* sub = app.add_subcommand(name, about);
    sub->add_option("--config", "key = value file; command-line flags win");
    return sub;
  };
  unsigned workers = 1;
  const auto add_workers = [&](CLI::App* sub) {
    sub->add_option("--workers", workers, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 256u))
        ->capture_default_str();
  };

  // ingest
  GraphArgs ingest_graph;
  std::string ingest_dir;
  auto* ingest = configurable("ingest", "validate triples/meta and write canonical copies");
  ingest_graph.add(ingest);
  ingest->add_option(flag("out-dir"), ingest_dir, "output directory")->required();
  ingest->callback([&] {
    const auto kg = ingest_graph.load();
    make_dir(ingest_dir);
    auto t = open_out(join_path(ingest_dir, "triples.tsv"));
    write_triples(t, kg);
    auto m = open_out(join_path(ingest_dir, "meta.tsv"));
    write_meta(m, kg);
    const auto& d = kg.diagnostics();
    out << "triple_lines\t" << d.triple_lines << '\n'
        << "duplicate_triples\t" << d.duplicate_triples << '\n'
        << "meta_lines\t" << d.meta_lines << '\n'
        << "entities\t" << kg.entity_count() << '\n'
        << "relations\t" << kg.base_relation_count() << '\n';
  });

  // stats
  GraphArgs stats_graph;
  std::vector<std::string> stats_instances;
  auto* stats = configurable("stats", "corpus statistics as key/value lines");
  stats_graph.add(stats);
  stats->add_option("--instances", stats_instances, "instance files with paths");
  stats->callback([&] {
    const auto kg = with_inverses(stats_graph.load());
    if (stats_instances.empty()) {
      out << format_stats(graph_stats(kg));
    } else {
      const auto all = read_all(stats_instances, kg);
      out << format_stats(graph_stats(kg, all));
    }
  });

  // sample-paths
  GraphArgs sample_graph;
  WalkConfig sample_walk;
  std::string sample_pairs;
  std::string sample_source;
  std::string sample_target;
  std::string sample_hidden;
  std::string sample_out;
  auto* sample = configurable("sample-paths", "random-walk paths between entity pairs");
  sample_graph.add(sample);
  add_walk_options(sample, sample_walk);
  sample->add_option("--pairs", sample_pairs, "file of source<TAB>target lines");
  sample->add_option("--source", sample_source, "source entity");
  sample->add_option("--target", sample_target, "target entity");
  sample->add_option(flag("hidden-relation"), sample_hidden,
                     "relation of the (source, target) fact to hide");
  sample->add_option("--out", sample_out, "path file (default stdout)");
  add_workers(sample);
  sample->callback([&] {
    validate(sample_walk);
    const auto kg = with_inverses(sample_graph.load());
    std::vector<std::pair<EntityId, EntityId>> pairs;
    if (!sample_pairs.empty()) {
      auto in = open_in(sample_pairs);
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        const auto content = text::strip_cr(line);
        if (content.empty()) continue;
        const auto f = text::split(content, '\t');
        if (f.size() != 2) throw ParseError(sample_pairs, line_no, "expected source<TAB>target");
        pairs.emplace_back(resolve_entity(kg, std::string(f[0])),
                           resolve_entity(kg, std::string(f[1])));
      }
    } else if (!sample_source.empty() && !sample_target.empty()) {
      pairs.emplace_back(resolve_entity(kg, sample_source), resolve_entity(kg, sample_target));
    } else {
      throw ConfigError("give --pairs or both --source and --target");
    }
    std::optional<RelationId> hidden;
    if (!sample_hidden.empty()) hidden = resolve_relations(kg, {sample_hidden}).front();
    std::vector<PairPaths> records(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t i) {
      const auto [s, t] = pairs[i];
      records[i] = {s, t, cap_paths(sample_paths(kg, s, t, sample_walk, hidden),
                                    sample_walk.path_cap)};
    });
    if (sample_out.empty()) {
      write_path_file(out, kg, records);
    } else {
      auto f = open_out(sample_out);
      write_path_file(f, kg, records);
    }
  });

  // build-dataset
  GraphArgs build_graph;
  WalkConfig build_walk;
  SamplingConfig build_sampling;
  std::vector<std::string> build_queries;
  std::string build_dir;
  auto* build = configurable("build-dataset", "split, corrupt and attach paths");
  build_graph.add(build);
  add_walk_options(build, build_walk);
  build->add_option(flag("query-relation"), build_queries,
                    "relations to split and predict (default: all)");
  build->add_option(flag("same-relation-prob"), build_sampling.same_relation_prob,
                    "probability of same-relation entity corruption")
      ->capture_default_str();
  build->add_option(flag("neg-train"), build_sampling.neg_per_pos_train,
                    "negatives per positive in train")
      ->capture_default_str();
  build->add_option(flag("neg-test"), build_sampling.neg_per_pos_test,
                    "negatives per positive in dev and test")
      ->capture_default_str();
  build->add_option("--seed", build_sampling.seed, "split and corruption seed")
      ->capture_default_str();
  build->add_option(flag("out-dir"), build_dir, "output directory")->required();
  add_workers(build);
  build->callback([&] {
    const auto kg = build_graph.load();
    const auto queries = resolve_relations(kg, build_queries);
    const auto ds = build_dataset(kg, queries, build_walk, build_sampling, workers);
    make_dir(build_dir);
    const auto write = [&](const std::string& name, const std::vector<QueryInstance>& v) {
      auto f = open_out(join_path(build_dir, name));
      write_instances(f, ds.path_graph, v);
    };
    write("train.tsv", ds.train);
    write("dev.tsv", ds.dev);
    write("test.tsv", ds.test);
    auto pg = open_out(join_path(build_dir, "path_triples.tsv"));
    write_triples(pg, ds.path_graph);
    out << "train\t" << ds.train.size() << '\n'
        << "dev\t" << ds.dev.size() << '\n'
        << "test\t" << ds.test.size() << '\n';
  });

  // export-statements
  GraphArgs export_graph;
  TextArgs export_text;
  std::vector<std::string> export_instances;
  std::string export_out;
  std::string export_pemb;
  std::uint32_t export_dim = 64;
  std::uint64_t export_seed = 0;
  auto* exporter = configurable("export-statements",
                                "verbalize entities and paths for the text encoder");
  export_graph.add(exporter);
  exporter->add_option("--templates", export_text.templates, "relation templates TSV");
  exporter->add_option("--style", export_text.style, "statement punctuation")
      ->check(CLI::IsMember({"cjk", "latin"}))
      ->capture_default_str();
  exporter->add_option("--instances", export_instances, "instance files whose paths to verbalize");
  exporter->add_option("--out", export_out, "statements TSV")->required();
  exporter->add_option(flag("hash-pemb"), export_pemb,
                       "also write hashed-encoder vectors for every statement");
  exporter->add_option(flag("hash-dim"), export_dim, "hashed-encoder width")
      ->capture_default_str();
  exporter->add_option(flag("hash-seed"), export_seed, "hashed-encoder seed")
      ->capture_default_str();
  exporter->callback([&] {
    const auto kg = with_inverses(export_graph.load());
    const auto templates = export_text.load_templates(kg);
    if (!export_instances.empty() && !templates) {
      throw ConfigError("path statements need --templates");
    }
    const auto all = read_all(export_instances, kg);
    const auto statements = collect_statements(kg, templates ? &*templates : nullptr, all,
                                               export_text.statement_style());
    auto f = open_out(export_out);
    write_statements(f, statements);
    if (!export_pemb.empty()) {
      write_store_file(export_pemb, hashed_store(statements, export_dim, export_seed));
    }
    out << "statements\t" << statements.size() << '\n';
  });

  // train
  GraphArgs train_graph;
  TextArgs train_text;
  std::string train_model = "A";
  std::string train_file;
  std::string dev_file;
  std::string checkpoint_out;
  std::string log_out;
  std::uint64_t init_seed = 0;
  HyperParams hyper;
  TrainConfig train_cfg;
  std::string grid_lr;
  std::string grid_d;
  std::string grid_m;
  auto* trainer = configurable("train", "train model A or B with early stopping");
  train_graph.add(trainer);
  train_text.add(trainer, true);
  trainer->add_option("--model", train_model, "A (entity text RNN) or B (path text)")
      ->check(CLI::IsMember({"A", "B"}))
      ->capture_default_str();
  trainer->add_option("--train", train_file, "training instances")->required();
  trainer->add_option("--dev", dev_file, "dev instances");
  trainer->add_option("--out", checkpoint_out, "checkpoint file")->required();
  trainer->add_option("--log", log_out, "training log TSV");
  trainer->add_option(flag("init-seed"), init_seed, "parameter initialization seed")
      ->capture_default_str();
  trainer->add_option("-d,--d", hyper.d, "relation and hidden width")->capture_default_str();
  trainer->add_option("-m,--m", hyper.m, "entity type width")->capture_default_str();
  trainer->add_option(flag("l2-embeddings"), hyper.l2_embeddings,
                      "regularize touched embedding columns")
      ->capture_default_str();
  trainer->add_option(flag("share-query"), hyper.share_query_embeddings,
                      "query relations reuse path relation embeddings")
      ->capture_default_str();
  trainer->add_option(flag("learning-rate") + ",--lr", train_cfg.learning_rate, "Adam step size")
      ->capture_default_str();
  trainer->add_option("--batch", train_cfg.batch, "batch size")->capture_default_str();
  trainer->add_option("--epochs", train_cfg.epochs, "maximum epochs")->capture_default_str();
  trainer->add_option("--lambda", train_cfg.lambda, "L2 weight")->capture_default_str();
  trainer->add_option("--beta1", train_cfg.beta1, "Adam beta1")->capture_default_str();
  trainer->add_option("--beta2", train_cfg.beta2, "Adam beta2")->capture_default_str();
  trainer->add_option("--epsilon", train_cfg.epsilon, "Adam epsilon")->capture_default_str();
  trainer->add_option("--patience", train_cfg.patience, "early-stopping patience (epochs)")
      ->capture_default_str();
  trainer->add_option(flag("min-delta"), train_cfg.min_delta,
                      "minimum dev accuracy improvement")
      ->capture_default_str();
  trainer->add_option("--seed", train_cfg.seed, "batch shuffling seed")->capture_default_str();
  trainer->add_option(flag("grid-lr"), grid_lr, "grid search: comma-separated learning rates");
  trainer->add_option(flag("grid-d"), grid_d, "grid search: comma-separated d (= h)");
  trainer->add_option(flag("grid-m"), grid_m, "grid search: comma-separated m");
  add_workers(trainer);
  trainer->callback([&] {
    const auto kind = parse_model_kind(train_model);
    const auto kg = with_inverses(train_graph.load());
    const auto templates = train_text.load_templates(kg);
    const auto store = train_text.store();
    const auto train_set = read_instance_file(train_file, kg);
    const auto dev_set =
        dev_file.empty() ? std::vector<QueryInstance>{} : read_instance_file(dev_file, kg);
    std::vector<QueryInstance> both = train_set;
    both.insert(both.end(), dev_set.begin(), dev_set.end());
    const FeatureContext ctx(kg, templates ? &*templates : nullptr, store,
                             train_text.mode(train_text.lookup_seed), both, kind,
                             train_text.statement_style());
    const auto train_features = features_of(ctx, train_set);
    const auto dev_features = features_of(ctx, dev_set);
    hyper.H = ctx.text_dim();
    hyper.lambda = train_cfg.lambda;
    train_cfg.workers = workers;

    const auto run_cell = [&](const TrainConfig& cfg, const HyperParams& hp) {
      return train(init_params(kind, hp, kg, init_seed), train_features, dev_features, ctx,
                   cfg);
    };
    TrainConfig cfg = train_cfg;
    HyperParams hp = hyper;
    if (!grid_lr.empty() || !grid_d.empty() || !grid_m.empty()) {
      GridSpec grid;
      grid.learning_rates = parse_list<double>(grid_lr, "learning rate");
      grid.dims = parse_list<std::uint32_t>(grid_d, "d");
      grid.type_dims = parse_list<std::uint32_t>(grid_m, "m");
      if (grid.learning_rates.empty()) grid.learning_rates = {cfg.learning_rate};
      if (grid.dims.empty()) grid.dims = {hp.d};
      if (grid.type_dims.empty()) grid.type_dims = {hp.m};
      const auto result = grid_search(grid, cfg, hp, run_cell);
      for (const auto& cell : result.cells) {
        out << "grid\t" << text::format_double(cell.train.learning_rate) << '\t'
            << cell.hyper.d << '\t' << cell.hyper.m << '\t'
            << text::format_double(cell.dev_accuracy) << '\n';
      }
      cfg = result.best.train;
      hp = result.best.hyper;
    }
    const auto result = run_cell(cfg, hp);
    write_checkpoint_file(checkpoint_out, result.best,
                          checkpoint_info(kg, train_text.lookup_seed));
    if (!log_out.empty()) {
      auto f = open_out(log_out);
      write_train_log(f, result.log);
    }
    out << "epochs\t" << result.log.size() << '\n'
        << "best_epoch\t" << result.best_epoch << '\n'
        << "dev_accuracy\t" << text::format_double(result.best_dev_accuracy) << '\n';
  });

  // evaluate
  GraphArgs eval_graph;
  TextArgs eval_text;
  std::string eval_checkpoint;
  std::vector<std::string> eval_instances;
  std::string eval_out;
  auto* evaluate = configurable("evaluate", "per-relation AP and MAP on test instances");
  eval_graph.add(evaluate);
  eval_text.add(evaluate, false);
  evaluate->add_option("--checkpoint", eval_checkpoint, "trained checkpoint")->required();
  evaluate->add_option("--instances", eval_instances, "test instance files")->required();
  evaluate->add_option("--out", eval_out, "report TSV (default stdout)");
  add_workers(evaluate);
  evaluate->callback([&] {
    const auto m = load_model(eval_graph, eval_text, eval_checkpoint);
    const auto test = read_all(eval_instances, m.kg);
    const FeatureContext ctx(m.kg, m.templates ? &*m.templates : nullptr, m.store,
                             eval_text.mode(m.info.seed), test, m.params.kind,
                             eval_text.statement_style());
    const auto scored = score_instances(test, m.params, ctx, workers);
    const auto report =
        mean_average_precision(scored, m.kg, std::string(model_tag(m.params.kind)));
    if (eval_out.empty()) {
      write_report(out, report);
    } else {
      auto f = open_out(eval_out);
      write_report(f, report);
    }
    for (const auto& name : report.skipped) err << "skipped\t" << name << "\tno positives\n";
  });

  // explain
  GraphArgs explain_graph;
  TextArgs explain_text;
  std::string explain_checkpoint;
  std::string explain_instances;
  std::vector<std::size_t> explain_index;
  auto* explain = configurable("explain", "attention explanations (query, high/low paths, P)");
  explain_graph.add(explain);
  explain_text.add(explain, false);
  explain->add_option("--checkpoint", explain_checkpoint, "trained checkpoint")->required();
  explain->add_option("--instances", explain_instances, "instance file")->required();
  explain->add_option("--index", explain_index, "0-based instance indices (default: all)");
  explain->callback([&] {
    const auto m = load_model(explain_graph, explain_text, explain_checkpoint);
    if (!m.templates) throw ConfigError("explain needs --templates");
    const auto instances = read_instance_file(explain_instances, m.kg);
    std::vector<std::size_t> picks = explain_index;
    if (picks.empty()) {
      for (std::size_t i = 0; i < instances.size(); ++i) picks.push_back(i);
    }
    std::vector<QueryInstance> chosen;
    for (const auto i : picks) {
      if (i >= instances.size()) {
        throw ConfigError("instance index " + std::to_string(i) + " out of range");
      }
      chosen.push_back(instances[i]);
    }
    const FeatureContext ctx(m.kg, &*m.templates, m.store, explain_text.mode(m.info.seed),
                             chosen, m.params.kind, explain_text.statement_style());
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      const auto trace = score_pair(ctx.features(chosen[k]), m.params, ctx);
      if (k > 0) out << '\n';
      out << render_explanation(explain_instance(chosen[k], trace, m.kg, *m.templates,
                                                 explain_text.statement_style()));
    }
  });

  // synth-kg
  SynthConfig synth_cfg;
  std::string synth_dir;
  auto* synth = configurable("synth-kg", "seeded synthetic benchmark graph");
  synth->add_option(flag("out-dir"), synth_dir, "output directory")->required();
  synth->add_option("--entities", synth_cfg.entities, "entity count")->capture_default_str();
  synth->add_option("--relations", synth_cfg.relations, "relation count")
      ->capture_default_str();
  synth->add_option("--planted", synth_cfg.planted, "planted rel1 -> rel2 chains")
      ->capture_default_str();
  synth->add_option("--background", synth_cfg.background, "random background triples")
      ->capture_default_str();
  synth->add_option("--types", synth_cfg.types, "entity type labels")->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed, "generator seed")->capture_default_str();
  synth->callback([&] {
    const auto kg = make_synth_kg(synth_cfg);
    write_synth_kg(kg, synth_dir);
    out << "triples\t" << kg.graph.triples().size() << '\n'
        << "entities\t" << kg.graph.entity_count() << '\n'
        << "query_relation\t" << kg.graph.relation_name(kg.target) << '\n';
  });

  const auto fail = [&](int code, std::string_view kind, std::string_view message) {
    std::string flat(message);
    for (auto& c : flat) {
      if (c == '\n' || c == '\t') c = ' ';
    }
    err << "error\t" << code << '\t' << kind << '\t' << flat << '\n';
    return code;
  };

  try {
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return fail(kUsage, "usage", e.what());
  } catch (const IoError& e) {
    return fail(kIo, "io", e.what());
  } catch (const ParseError& e) {
    return fail(kFormat, "format", e.what());
  } catch (const FormatError& e) {
    return fail(kFormat, "format", e.what());
  } catch (const ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const SamplingError& e) {
    return fail(kSampling, "sampling", e.what());
  } catch (const MissingEmbeddingError& e) {
    return fail(kMissingEmbedding, "missing-embedding", e.what());
  } catch (const std::exception& e) {
    return fail(kFailure, "failure", e.what());
  }
  return kOk;
}

}  // namespace pathkg::cli
