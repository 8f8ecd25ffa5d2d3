#include <doctest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "pathkg/errors.hpp"
#include "pathkg/sampler.hpp"
#include "pathkg/text.hpp"
#include "pathkg/verbalizer.hpp"

using namespace pathkg;

TEST_CASE("entity statements") {
  EntityMeta jujube{"枣树皮", {"中药"}, "药品", std::nullopt};
  const auto s = entity_statement(jujube);
  CHECK(s.text == "枣树皮, 药品, 中药。");
  CHECK(s.key == text::fnv1a64(s.text));
  CHECK(s.kind == StatementKind::entity);

  EntityMeta bare{"呼吸内科", {}, std::nullopt, std::nullopt};
  CHECK(entity_statement(bare).text == "呼吸内科。");
  CHECK(entity_statement(bare, StatementStyle::latin()).text == "呼吸内科.");

  EntityMeta typed_only{"x", {"t1", "t2"}, std::nullopt, "ignored"};
  CHECK(entity_statement(typed_only).text == "x, t1。");
  CHECK(entity_statement(jujube).key == entity_statement(EntityMeta(jujube)).key);
}

TEST_CASE("Figure 1 path statements") {
  const auto kg = with_inverses(fixtures::figure1());
  const auto templates = fixtures::figure1_templates(kg);
  const auto e = [&](const char* k) { return *kg.find_entity(k); };
  const auto r = [&](const char* n) { return *kg.find_relation(n); };

  const Path two{{e("肺静脉畸形引流"), e("呼吸窘迫"), e("呼吸内科")},
                 {r("疾病相关症状"), r("症状相关科室")}};
  const auto s = path_statement(two, kg, templates);
  CHECK(s.text == "肺静脉畸形引流疾病的相关症状是呼吸窘迫，呼吸窘迫症状的相关科室是呼吸内科。");
  CHECK(s.kind == StatementKind::path);

  const Path one{{e("呼吸窘迫"), e("血气胸")}, {r("症状相关疾病")}};
  CHECK(path_statement(one, kg, templates).text == "呼吸窘迫症状的相关疾病是血气胸。");

  // Inverse hops render the base template with the roles swapped.
  const Path back{{e("呼吸内科"), e("呼吸窘迫")}, {*kg.inverse(r("症状相关科室"))}};
  CHECK(path_statement(back, kg, templates).text == "呼吸窘迫症状的相关科室是呼吸内科。");

  TemplateSet partial;
  partial.add(r("疾病相关症状"), RelationTemplate("{head} -> {tail}"));
  try {
    path_statement(two, kg, partial);
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find("症状相关科室") != std::string::npos);
  }
}

TEST_CASE("template validation") {
  CHECK_THROWS_AS(RelationTemplate("{head} and {head} {tail}"), ConfigError);
  CHECK_THROWS_AS(RelationTemplate("{head} only"), ConfigError);
  CHECK(RelationTemplate("{tail} <- {head}").render("a", "b") == "b <- a");

  const auto kg = fixtures::figure1();
  std::istringstream unknown("不存在\t{head}{tail}\n");
  CHECK_THROWS_AS(load_templates(unknown, kg), ParseError);
  std::istringstream bad("疾病相关症状\t{head}\n");
  CHECK_THROWS_AS(load_templates(bad, kg), ParseError);

  const auto templates = fixtures::figure1_templates(kg);
  std::ostringstream out;
  write_templates(out, kg, templates);
  std::istringstream in(out.str());
  CHECK(load_templates(in, kg).size() == templates.size());
}

TEST_CASE("distinct paths never share statement text") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto kg = with_inverses(fixtures::random_graph(15, 40, 3, seed));
    const auto templates = fixtures::plain_templates(kg);
    std::set<std::string> texts;
    std::size_t paths = 0;
    for (std::uint32_t s = 0; s < 5; ++s) {
      for (std::uint32_t t = 5; t < 10; ++t) {
        for (const auto& p : enumerate_paths(kg, static_cast<EntityId>(s),
                                             static_cast<EntityId>(t), 3)) {
          texts.insert(path_statement(p, kg, templates).text);
          ++paths;
        }
      }
    }
    CHECK(paths > 0);
    CHECK(texts.size() == paths);
  }
}

TEST_CASE("statement export") {
  const auto kg = with_inverses(fixtures::figure1());
  const auto templates = fixtures::figure1_templates(kg);
  const auto src = *kg.find_entity("肺静脉畸形引流");
  const auto dst = *kg.find_entity("呼吸内科");
  const std::vector<QueryInstance> insts = {
      {src, dst, *kg.find_relation("疾病相关症状"), Label::negative,
       enumerate_paths(kg, src, dst, 3)},
      {src, dst, *kg.find_relation("症状相关科室"), Label::negative,
       enumerate_paths(kg, src, dst, 3)}};
  const auto statements = collect_statements(kg, &templates, insts);
  std::set<std::uint64_t> keys;
  for (const auto& s : statements) keys.insert(s.key);
  CHECK(keys.size() == statements.size());
  CHECK(statements.size() == kg.entity_count() + insts[0].paths.size());
  CHECK(collect_statements(kg, nullptr, insts).size() == kg.entity_count());

  std::ostringstream out;
  write_statements(out, statements);
  std::istringstream in(out.str());
  const auto back = read_statements(in);
  REQUIRE(back.size() == statements.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].key == statements[i].key);
    CHECK(back[i].text == statements[i].text);
  }
  std::istringstream tampered("0000000000000001\t肺静脉畸形引流。\n");
  CHECK_THROWS_AS(read_statements(tampered), ParseError);
}
