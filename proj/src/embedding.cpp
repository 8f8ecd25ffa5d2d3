#include "pathkg/embedding.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

#include "pathkg/errors.hpp"
#include "pathkg/rng.hpp"
#include "pathkg/text.hpp"

namespace pathkg {

void TextEmbeddingStore::add(std::uint64_t key, std::span<const float> vector) {
  if (vector.size() != dim_) {
    throw FormatError("embedding width " + std::to_string(vector.size()) +
                      " does not match store dim " + std::to_string(dim_));
  }
  for (const float v : vector) {
    if (!std::isfinite(v)) throw FormatError("non-finite embedding for key " + text::hex64(key));
  }
  if (!index_.emplace(key, keys_.size()).second) {
    throw FormatError("duplicate embedding key " + text::hex64(key));
  }
  keys_.push_back(key);
  values_.insert(values_.end(), vector.begin(), vector.end());
}

std::span<const float> TextEmbeddingStore::find(std::uint64_t key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) return {};
  return {values_.data() + it->second * dim_, dim_};
}

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'E', 'M', 'B'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>(u & 0xff);
    u = static_cast<U>(u >> 8);
  }
  out.write(bytes.data(), bytes.size());
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get_le(const char* what) {
    std::array<unsigned char, sizeof(T)> bytes{};
    read(bytes.data(), bytes.size(), what);
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<decltype(u)>((u << 8) | bytes[i]);
    return static_cast<T>(u);
  }

  void read(void* dst, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != n) {
      throw FormatError(std::string("truncated PEMB payload at byte offset ") +
                        std::to_string(offset_ + got) + " while reading " + what);
    }
    offset_ += n;
  }

  std::uint64_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

void write_store(std::ostream& out, const TextEmbeddingStore& store) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint32_t>(out, store.dim());
  put_le<std::uint64_t>(out, store.size());
  for (const auto key : store.keys()) {
    put_le<std::uint64_t>(out, key);
    for (const float v : store.find(key)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
}

TextEmbeddingStore read_store(std::istream& in) {
  Reader r(in);
  std::array<char, 4> magic{};
  r.read(magic.data(), magic.size(), "magic");
  if (magic != kMagic) throw FormatError("bad PEMB magic");
  const auto version = r.get_le<std::uint16_t>("version");
  if (version != kVersion) {
    throw FormatError("unsupported PEMB version " + std::to_string(version));
  }
  const auto dim = r.get_le<std::uint32_t>("dim");
  const auto count = r.get_le<std::uint64_t>("count");
  if (dim == 0 && count > 0) throw FormatError("PEMB dim must be >= 1");
  TextEmbeddingStore store(dim);
  std::vector<float> vec(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto key = r.get_le<std::uint64_t>("record key");
    for (auto& v : vec) v = std::bit_cast<float>(r.get_le<std::uint32_t>("record vector"));
    store.add(key, vec);
  }
  return store;
}

void write_store_file(const std::string& path, const TextEmbeddingStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_store(out, store);
}

TextEmbeddingStore read_store_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_store(in);
}

std::vector<double> synthetic_vector(std::uint64_t seed, std::uint64_t key,
                                     std::uint32_t dim) {
  Rng rng(derive_seed(seed, key, 0x73796e746865ULL));
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (std::uint32_t i = 0; i < dim; i += 2) {
      // Box-Muller; u1 in (0, 1].
      const double u1 = 1.0 - uniform_real(rng);
      const double u2 = uniform_real(rng);
      const double radius = std::sqrt(-2.0 * std::log(u1));
      v[i] = radius * std::cos(2.0 * std::numbers::pi * u2);
      if (i + 1 < dim) v[i + 1] = radius * std::sin(2.0 * std::numbers::pi * u2);
    }
    for (const double x : v) norm2 += x * x;
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

std::vector<double> lookup(const TextEmbeddingStore& store, std::uint64_t key,
                           LookupMode mode) {
  if (store.contains(key)) {
    const auto found = store.find(key);
    return {found.begin(), found.end()};
  }
  if (mode.kind == LookupMode::Kind::strict) {
    throw MissingEmbeddingError("missing embedding for statement key " + text::hex64(key));
  }
  return synthetic_vector(mode.seed, key, store.dim());
}

namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_' || c == '-';
}

// Splits into ASCII word tokens and runs of non-ASCII code points. CJK
// punctuation is treated as a separator.
std::vector<std::string> tokenize(std::string_view text) {
  static constexpr std::array<std::string_view, 6> kCjkPunct = {"，", "。", "、", "；", "：", "？"};
  std::vector<std::string> tokens;
  std::string current;
  bool current_ascii = true;
  const auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      if (is_word_byte(c)) {
        if (!current_ascii) flush();
        current_ascii = true;
        current += static_cast<char>(c);
      } else {
        flush();
      }
      ++i;
      continue;
    }
    const std::size_t len = c >= 0xf0 ? 4 : c >= 0xe0 ? 3 : c >= 0xc0 ? 2 : 1;
    const auto cp = text.substr(i, len);
    bool punct = false;
    for (const auto p : kCjkPunct) punct = punct || cp == p;
    if (punct) {
      flush();
    } else {
      if (current_ascii) flush();
      current_ascii = false;
      current += cp;
    }
    i += len;
  }
  flush();
  return tokens;
}

std::vector<std::string_view> code_points(std::string_view s) {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    const std::size_t len = c >= 0xf0 ? 4 : c >= 0xe0 ? 3 : c >= 0xc0 ? 2 : 1;
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace

std::vector<float> hash_encode(std::string_view text, std::uint32_t dim,
                               std::uint64_t seed) {
  std::vector<double> acc(dim, 0.0);
  const auto add_feature = [&](const std::string& feature) {
    const auto v = synthetic_vector(seed, text::fnv1a64(feature), dim);
    for (std::uint32_t i = 0; i < dim; ++i) acc[i] += v[i];
  };
  const auto tokens = tokenize(text);
  add_feature("n:" + std::to_string(tokens.size()));
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto& tok = tokens[t];
    if (t < 4) add_feature("p" + std::to_string(t) + ":" + tok);
    if (static_cast<unsigned char>(tok.front()) < 0x80) {
      add_feature("w:" + tok);
    } else {
      const auto cps = code_points(tok);
      for (std::size_t k = 0; k < cps.size(); ++k) {
        add_feature("c:" + std::string(cps[k]));
        if (k + 1 < cps.size()) add_feature("cc:" + std::string(cps[k]) + std::string(cps[k + 1]));
      }
    }
    if (t + 1 < tokens.size()) add_feature("b:" + tok + " " + tokens[t + 1]);
    // Gapped pairs carry word order across short spans.
    for (std::size_t gap = 2; gap <= 3 && t + gap < tokens.size(); ++gap) {
      add_feature("s" + std::to_string(gap) + ":" + tok + " " + tokens[t + gap]);
    }
    // A token repeated shortly after links its left and right contexts, which
    // is how chained clauses (x ... x) show up.
    for (std::size_t gap = 1; gap <= 3 && t + gap < tokens.size(); ++gap) {
      if (tokens[t + gap] != tok) continue;
      const std::string left = t > 0 ? tokens[t - 1] : "^";
      const std::string right = t + gap + 1 < tokens.size() ? tokens[t + gap + 1] : "$";
      add_feature("r" + std::to_string(gap) + ":" + left + " " + right);
    }
  }
  double norm2 = 0.0;
  for (const double x : acc) norm2 += x * x;
  std::vector<float> out(dim, 0.0f);
  if (norm2 == 0.0) return out;
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::uint32_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] * inv);
  return out;
}

EmbeddingTable::EmbeddingTable(const TextEmbeddingStore& store, LookupMode mode,
                               std::span<const std::uint64_t> keys)
    : dim_(store.dim()) {
  for (const auto key : keys) {
    if (index_.contains(key)) continue;
    const auto v = lookup(store, key, mode);
    index_.emplace(key, values_.size());
    values_.insert(values_.end(), v.begin(), v.end());
  }
}

std::span<const double> EmbeddingTable::at(std::uint64_t key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) {
    throw MissingEmbeddingError("statement key " + text::hex64(key) + " was not resolved");
  }
  return {values_.data() + it->second, dim_};
}

}  // namespace pathkg
