#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "pathkg/embedding.hpp"
#include "pathkg/errors.hpp"
#include "pathkg/rng.hpp"

using namespace pathkg;

namespace {

std::string bytes_of(const TextEmbeddingStore& s) {
  std::ostringstream out(std::ios::binary);
  write_store(out, s);
  return out.str();
}

TextEmbeddingStore from_bytes(const std::string& b) {
  std::istringstream in(b, std::ios::binary);
  return read_store(in);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("PEMB round trip of 1000 random vectors is bit-identical") {
  TextEmbeddingStore store(24);
  Rng rng(1);
  std::vector<float> v(24);
  for (int i = 0; i < 1000; ++i) {
    for (auto& x : v) x = static_cast<float>(uniform_real(rng) * 2.0 - 1.0);
    store.add(rng(), v);
  }
  const auto bytes = bytes_of(store);
  CHECK(bytes.size() == 4 + 2 + 4 + 8 + 1000 * (8 + 24 * 4));
  CHECK(bytes.substr(0, 4) == "PEMB");
  const auto back = from_bytes(bytes);
  CHECK(back.dim() == 24);
  CHECK(back.keys() == store.keys());
  for (const auto k : store.keys()) {
    const auto a = store.find(k), b = back.find(k);
    CHECK(std::memcmp(a.data(), b.data(), a.size_bytes()) == 0);
  }
  CHECK(bytes_of(back) == bytes);
}

TEST_CASE("PEMB format errors") {
  TextEmbeddingStore one(2);
  const std::vector<float> v = {1.0f, 2.0f};
  one.add(7, v);
  auto bytes = bytes_of(one);
  // Claim two records while only one follows.
  bytes[10] = 2;
  try {
    from_bytes(bytes);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("byte offset 34") != std::string::npos);
  }
  auto magic = bytes_of(one);
  magic[0] = 'X';
  CHECK_THROWS_AS(from_bytes(magic), FormatError);
  auto version = bytes_of(one);
  version[4] = 9;
  CHECK_THROWS_AS(from_bytes(version), FormatError);
  CHECK_THROWS_AS(from_bytes("PE"), FormatError);
}

TEST_CASE("empty store is valid and misses every lookup") {
  const auto back = from_bytes(bytes_of(TextEmbeddingStore(16)));
  CHECK(back.size() == 0);
  CHECK(back.dim() == 16);
  CHECK(back.find(1).empty());
  CHECK_THROWS_AS(lookup(back, 1, LookupMode::strict()), MissingEmbeddingError);
}

TEST_CASE("store rejects bad records") {
  TextEmbeddingStore s(2);
  const std::vector<float> ok = {0.5f, 0.5f};
  s.add(1, ok);
  CHECK_THROWS_AS(s.add(1, ok), FormatError);
  const std::vector<float> wide = {1.0f, 2.0f, 3.0f};
  CHECK_THROWS_AS(s.add(2, wide), FormatError);
  const std::vector<float> nan = {std::numeric_limits<float>::quiet_NaN(), 0.0f};
  CHECK_THROWS_AS(s.add(3, nan), FormatError);
}

TEST_CASE("lookup modes") {
  TextEmbeddingStore s(3);
  const std::vector<float> v = {0.25f, -1.0f, 2.0f};
  s.add(42, v);
  const auto hit = lookup(s, 42, LookupMode::synthetic(1));
  CHECK(hit == std::vector<double>{0.25, -1.0, 2.0});
  try {
    lookup(s, 43, LookupMode::strict());
    FAIL("expected MissingEmbeddingError");
  } catch (const MissingEmbeddingError& e) {
    CHECK(std::string(e.what()).find("000000000000002b") != std::string::npos);
  }
  const auto a = lookup(s, 43, LookupMode::synthetic(1));
  CHECK(a == lookup(s, 43, LookupMode::synthetic(1)));
  CHECK(a != lookup(s, 43, LookupMode::synthetic(2)));
  CHECK(dot(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("synthetic vectors are nearly orthogonal") {
  const std::uint32_t H = 64;
  std::vector<std::vector<double>> vs;
  for (std::uint64_t k = 0; k < 10000; ++k) vs.push_back(synthetic_vector(3, k, H));
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i + 1 < vs.size(); i += 2) {
    sum += std::abs(dot(vs[i], vs[i + 1]));
    ++pairs;
  }
  CHECK(sum / static_cast<double>(pairs) < 3.0 / std::sqrt(static_cast<double>(H)));
  for (const auto& v : vs) CHECK(std::abs(dot(v, v) - 1.0) < 1e-12);
}

TEST_CASE("hash_encode is deterministic, unit norm and wording sensitive") {
  const auto a = hash_encode("e1 rel1 e2, e2 rel2 e3.", 64, 5);
  CHECK(a == hash_encode("e1 rel1 e2, e2 rel2 e3.", 64, 5));
  double n = 0.0;
  for (const float x : a) n += static_cast<double>(x) * x;
  CHECK(n == doctest::Approx(1.0).epsilon(1e-6));
  const auto to_d = [](const std::vector<float>& f) {
    return std::vector<double>(f.begin(), f.end());
  };
  const auto close = hash_encode("e1 rel1 e2, e2 rel2 e4.", 64, 5);
  const auto far = hash_encode("e7 rel5 e8.", 64, 5);
  CHECK(dot(to_d(a), to_d(close)) > dot(to_d(a), to_d(far)));
  const auto cjk = hash_encode("呼吸窘迫症状的相关科室是呼吸内科。", 32, 1);
  CHECK(cjk.size() == 32);
}
