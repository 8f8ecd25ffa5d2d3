#include <doctest.h>

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "pathkg/errors.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/path.hpp"
#include "pathkg/sampler.hpp"
#include "pathkg/stats.hpp"

using namespace pathkg;
using fixtures::graph_of;

namespace {

EntityId ent(const KnowledgeGraph& kg, std::string_view key) { return *kg.find_entity(key); }
RelationId rel(const KnowledgeGraph& kg, std::string_view name) {
  return *kg.find_relation(name);
}

}  // namespace

TEST_CASE("three well-formed triples without metadata") {
  const auto kg = graph_of({{"a", "r", "b"}, {"b", "r", "c"}, {"a", "s", "c"}});
  CHECK(kg.triples().size() == 3);
  CHECK(kg.entity_count() == 3);
  CHECK(kg.base_relation_count() == 2);
  for (std::uint32_t e = 0; e < 3; ++e) {
    CHECK(kg.entity_types(static_cast<EntityId>(e)).empty());
    CHECK(kg.entity_name(static_cast<EntityId>(e)) == kg.entity_key(static_cast<EntityId>(e)));
  }
}

TEST_CASE("Figure 1 adjacency reproduces the drawn edges") {
  const auto kg = fixtures::figure1();
  CHECK(kg.entity_count() == 8);
  CHECK(kg.base_relation_count() == 4);
  const std::vector<fixtures::Row> drawn = {
      {"肺静脉畸形引流", "疾病相关症状", "呼吸窘迫"},
      {"呼吸窘迫", "症状相关科室", "呼吸内科"},
      {"肺静脉畸形引流", "疾病相关症状", "鼓槌指"},
      {"鼓槌指", "症状相关症状", "肺淋巴管肌瘤"},
      {"肺淋巴管肌瘤", "症状相关科室", "呼吸内科"},
      {"呼吸窘迫", "症状相关疾病", "血气胸"},
  };
  for (const auto& [h, r, t] : drawn) {
    CHECK(kg.has_edge(ent(kg, h), rel(kg, r), ent(kg, t)));
    CHECK_FALSE(kg.has_edge(ent(kg, t), rel(kg, r), ent(kg, h)));
  }
  const auto lam = ent(kg, "肺淋巴管肌瘤");
  CHECK(kg.entity_types(lam).size() == 2);
  CHECK(kg.meta(lam).category == "症状");
}

TEST_CASE("a two-field line is a parse error naming the line") {
  std::istringstream in("a\tr\tb\nc\td\n");
  try {
    load_graph(in, nullptr, "t.tsv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.source() == "t.tsv");
    CHECK(std::string(e.what()).find("t.tsv:2") != std::string::npos);
  }
}

TEST_CASE("malformed names and metadata are rejected") {
  CHECK_THROWS_AS(graph_of({{"a", "", "b"}}), ParseError);
  CHECK_THROWS_AS(graph_of({{"a|x", "r", "b"}}), ParseError);
  CHECK_THROWS_AS(graph_of({{"a", "r;s", "b"}}), ParseError);
  CHECK_THROWS_AS(graph_of({{"a", "inv:r", "b"}}), ParseError);
  CHECK_THROWS_AS(graph_of({{"a", "r", "b"}}, "a\tA\tt\na\tA2\tt\n"), ParseError);
  CHECK_THROWS_AS(graph_of({{"a", "r", "b"}}, "a\n"), ParseError);
  CHECK_THROWS_AS(load_graph_files("/nonexistent/triples.tsv"), IoError);
}

TEST_CASE("duplicates are counted and collapsed; CRLF is accepted") {
  std::istringstream in("a\tr\tb\r\na\tr\tb\n\nb\tr\tc\n");
  const auto kg = load_graph(in, nullptr);
  CHECK(kg.triples().size() == 2);
  CHECK(kg.diagnostics().duplicate_triples == 1);
  CHECK(kg.find_entity("b").has_value());
}

TEST_CASE("inverse augmentation") {
  const auto kg = graph_of({{"a", "r", "b"}, {"b", "s", "c"}});
  const auto inv = with_inverses(kg);
  CHECK(inv.relation_count() == 2 * kg.relation_count());
  CHECK(inv.base_relation_count() == kg.base_relation_count());
  const auto r = rel(inv, "r");
  const auto ri = *inv.inverse(r);
  CHECK(inv.is_inverse(ri));
  CHECK(inv.relation_name(ri) == "inv:r");
  CHECK(*inv.inverse(ri) == r);
  CHECK(inv.base_relation(ri) == r);
  CHECK(inv.has_edge(ent(inv, "b"), ri, ent(inv, "a")));
  const auto edges = inv.out_edges(ent(inv, "b"));
  CHECK(std::find(edges.begin(), edges.end(), Edge{ri, ent(inv, "a")}) != edges.end());
  // Idempotent.
  const auto twice = with_inverses(inv);
  CHECK(twice.relation_count() == inv.relation_count());
  CHECK(twice.relations().names() == inv.relations().names());
  CHECK(std::equal(twice.triples().begin(), twice.triples().end(), inv.triples().begin(),
                   inv.triples().end()));
}

TEST_CASE("interning is injective and ids are dense") {
  SymbolTable t;
  CHECK(t.intern("x") == 0);
  CHECK(t.intern("y") == 1);
  CHECK(t.intern("x") == 0);
  CHECK(t.find("y") == 1u);
  CHECK_FALSE(t.find("z").has_value());
  CHECK(t.name(1) == "y");
}

TEST_CASE("write then load reproduces the graph") {
  const auto kg = fixtures::figure1();
  std::ostringstream t, m;
  write_triples(t, kg);
  write_meta(m, kg);
  std::istringstream tin(t.str()), min(m.str());
  const auto back = load_graph(tin, &min);
  // Ids follow first appearance in the file, so compare by name.
  const auto keyed = [](const KnowledgeGraph& g) {
    std::set<std::array<std::string, 3>> out;
    for (const auto& t : g.triples()) {
      out.insert({g.entity_key(t.head), g.relation_name(t.relation), g.entity_key(t.tail)});
    }
    return out;
  };
  CHECK(keyed(back) == keyed(kg));
  CHECK(back.entity_count() == kg.entity_count());
  for (std::uint32_t e = 0; e < kg.entity_count(); ++e) {
    const auto id = static_cast<EntityId>(e);
    const auto other = *back.find_entity(kg.entity_key(id));
    CHECK(back.meta(other).name == kg.meta(id).name);
    CHECK(back.meta(other).types == kg.meta(id).types);
    CHECK(back.meta(other).category == kg.meta(id).category);
  }
  // A second cycle is byte-stable.
  std::ostringstream t2, m2;
  write_triples(t2, back);
  write_meta(m2, back);
  std::istringstream tin2(t2.str()), min2(m2.str());
  const auto third = load_graph(tin2, &min2);
  std::ostringstream t3;
  write_triples(t3, third);
  CHECK(t3.str() == t2.str());
}

TEST_CASE("statistics of an empty graph are zero") {
  const auto kg = graph_of({});
  const auto s = graph_stats(kg);
  CHECK(s.triples == 0);
  CHECK(s.relation_types == 0);
  CHECK(s.entities == 0);
  CHECK_FALSE(s.paths.has_value());
}

TEST_CASE("path statistics over a hand-enumerated ten-triple graph") {
  // a -> d paths within three hops, counted by hand:
  //   a r3 d; a r2 c r1 d; a r1 b r2 d; a r1 b r1 c r1 d
  // so 4 paths, lengths 1, 2, 2, 3.
  const auto kg = graph_of({{"a", "r1", "b"},
                            {"b", "r1", "c"},
                            {"c", "r1", "d"},
                            {"a", "r2", "c"},
                            {"b", "r2", "d"},
                            {"a", "r3", "d"},
                            {"e", "r1", "f"},
                            {"f", "r2", "g"},
                            {"g", "r3", "e"},
                            {"e", "r2", "h"}});
  const auto paths = enumerate_paths(kg, ent(kg, "a"), ent(kg, "d"), 3);
  REQUIRE(paths.size() == 4);
  CHECK(paths[0].hops() == 1);
  CHECK(paths[3].hops() == 3);

  QueryInstance pos{ent(kg, "a"), ent(kg, "d"), rel(kg, "r3"), Label::positive, paths};
  QueryInstance neg{ent(kg, "e"), ent(kg, "g"), rel(kg, "r3"), Label::negative,
                    enumerate_paths(kg, ent(kg, "e"), ent(kg, "g"), 3)};
  // e -> g: e r1 f r2 g only (g r3 e points the other way).
  REQUIRE(neg.paths.size() == 1);
  const std::vector<QueryInstance> corpus = {pos, neg};
  const auto s = graph_stats(kg, corpus);
  CHECK(s.triples == 10);
  CHECK(s.relation_types == 3);
  CHECK(s.entities == 8);
  CHECK(s.paths == 5u);
  CHECK(*s.avg_path_length == doctest::Approx((1 + 2 + 2 + 3 + 2) / 5.0));
  CHECK(s.max_path_length == 3u);
  CHECK(*s.avg_paths_per_query_relation == doctest::Approx(5.0));
  CHECK(*s.avg_positive_per_query_relation == doctest::Approx(1.0));
  CHECK(*s.avg_negative_per_query_relation == doctest::Approx(1.0));

  const auto text = format_stats(s);
  CHECK(text.find("# Triples\t10\n") == 0);
  CHECK(text.find("Max path length\t3\n") != std::string::npos);
}
