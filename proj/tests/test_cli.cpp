#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pathkg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = pathkg::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

const std::string kTriples = fixtures::data_path("figure1/triples.tsv");
const std::string kMeta = fixtures::data_path("figure1/meta.tsv");

}  // namespace

TEST_CASE("stats on the Figure 1 fixture") {
  const auto r = cli({"stats", "--triples", kTriples, "--meta", kMeta});
  CHECK(r.code == 0);
  CHECK(r.out.find("# Relation types\t4\n") != std::string::npos);
  CHECK(r.out.find("# Entities\t8\n") != std::string::npos);
}

TEST_CASE("errors map to distinct exit codes with one parsable line") {
  const auto missing = cli({"stats", "--triples", "/nonexistent.tsv"});
  CHECK(missing.code == 3);
  CHECK(missing.err.rfind("error\t3\tio\t", 0) == 0);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  CHECK(cli({"stats", "--bogus"}).code == 2);
  CHECK(cli({"nope"}).code == 2);
  CHECK(cli({"--help"}).code == 0);

  TempDir dir("pathkg_cli_errors");
  std::ofstream(dir / "bad.tsv") << "a\tb\n";
  const auto bad = cli({"stats", "--triples", dir / "bad.tsv"});
  CHECK(bad.code == 4);
  CHECK(bad.err.find("bad.tsv:1") != std::string::npos);

  const auto cfg = cli({"synth-kg", "--out-dir", dir / "kg", "--relations", "2"});
  CHECK(cfg.code == 5);
}

TEST_CASE("config files merge under flag precedence") {
  TempDir dir("pathkg_cli_config");
  std::ofstream(dir / "run.cfg") << "triples = " << kTriples << "\nmeta = /nonexistent\n";
  CHECK(cli({"stats", "--config", dir / "run.cfg"}).code == 3);
  const auto r = cli({"stats", "--config", dir / "run.cfg", "--meta", kMeta});
  CHECK(r.code == 0);
  CHECK(r.out.find("# Entities\t8\n") != std::string::npos);
}

TEST_CASE("synth-kg pipeline: train, evaluate, explain") {
  TempDir dir("pathkg_cli_pipeline");
  REQUIRE(cli({"synth-kg", "--out-dir", dir / "kg", "--seed", "1"}).code == 0);
  const std::vector<std::string> graph = {"--triples", dir / "kg/triples.tsv", "--meta",
                                          dir / "kg/meta.tsv"};
  const auto with = [&](std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), graph.begin(), graph.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  const auto build = cli(with({"build-dataset"},
                              {"--query-relation", "rel0", "--max-len", "3", "--walks", "1000",
                               "--path-cap", "50", "--walk-seed", "7", "--seed", "11",
                               "--out-dir", dir / "ds"}));
  REQUIRE(build.code == 0);
  const std::vector<std::string> text = {"--templates", dir / "kg/templates.tsv", "--lookup",
                                         "synthetic", "--text-dim", "32", "--style", "latin"};
  auto train_args = with({"train"}, text);
  train_args.insert(train_args.end(),
                    {"--model", "A", "--train", dir / "ds/train.tsv", "--dev", dir / "ds/dev.tsv",
                     "-d", "16", "-m", "8", "--lr", "0.01", "--epochs", "50", "--seed", "17",
                     "--init-seed", "13"});
  auto first = train_args;
  first.insert(first.end(), {"--out", dir / "a.ckpt", "--log", dir / "a.log"});
  REQUIRE(cli(first).code == 0);
  auto second = train_args;
  second.insert(second.end(), {"--out", dir / "b.ckpt", "--log", dir / "b.log"});
  REQUIRE(cli(second).code == 0);
  CHECK(slurp(dir / "a.ckpt") == slurp(dir / "b.ckpt"));
  CHECK(slurp(dir / "a.log") == slurp(dir / "b.log"));

  auto eval = with({"evaluate"}, text);
  eval.insert(eval.end(), {"--checkpoint", dir / "a.ckpt", "--instances", dir / "ds/test.tsv",
                           "--out", dir / "report.tsv"});
  REQUIRE(cli(eval).code == 0);
  const auto report = slurp(dir / "report.tsv");
  const auto map_pos = report.find("MAP\t");
  REQUIRE(map_pos != std::string::npos);
  const double map = std::stod(report.substr(map_pos + 4));
  CHECK(map >= 0.95);
  eval.back() = dir / "report2.tsv";
  REQUIRE(cli(eval).code == 0);
  CHECK(slurp(dir / "report2.tsv") == report);

  auto explain = with({"explain"}, text);
  explain.insert(explain.end(), {"--checkpoint", dir / "a.ckpt", "--instances",
                                 dir / "ds/test.tsv", "--index", "0"});
  const auto ex = cli(explain);
  REQUIRE(ex.code == 0);
  CHECK(ex.out.rfind("Query\trel0(", 0) == 0);
  CHECK(ex.out.find("\nP\t") != std::string::npos);

  // The checkpoint cannot be scored with a mismatched text width.
  auto wrong = eval;
  wrong[std::find(wrong.begin(), wrong.end(), "32") - wrong.begin()] = "16";
  CHECK(cli(wrong).code == 5);
}
