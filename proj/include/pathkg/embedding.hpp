#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pathkg {

// Statement key -> fixed-width float vector. Records keep insertion order so
// a read/write cycle is byte-identical.
class TextEmbeddingStore {
 public:
  explicit TextEmbeddingStore(std::uint32_t dim = 0) : dim_(dim) {}

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  bool contains(std::uint64_t key) const { return index_.contains(key); }

  // Throws FormatError on a width mismatch, non-finite value or duplicate key.
  void add(std::uint64_t key, std::span<const float> vector);
  std::span<const float> find(std::uint64_t key) const;  // empty when absent

  const std::vector<std::uint64_t>& keys() const { return keys_; }

 private:
  std::uint32_t dim_;
  std::vector<std::uint64_t> keys_;
  std::vector<float> values_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

// PEMB v1, little-endian: "PEMB", u16 version, u32 dim, u64 count, then count
// records of (u64 key, dim x f32).
void write_store(std::ostream& out, const TextEmbeddingStore& store);
TextEmbeddingStore read_store(std::istream& in);
void write_store_file(const std::string& path, const TextEmbeddingStore& store);
TextEmbeddingStore read_store_file(const std::string& path);

struct LookupMode {
  enum class Kind : std::uint8_t { strict, synthetic };
  Kind kind = Kind::strict;
  std::uint64_t seed = 0;

  static LookupMode strict() { return {Kind::strict, 0}; }
  static LookupMode synthetic(std::uint64_t seed) { return {Kind::synthetic, seed}; }
};

// Unit-norm Gaussian-direction vector, a pure function of (seed, key, dim).
std::vector<double> synthetic_vector(std::uint64_t seed, std::uint64_t key,
                                     std::uint32_t dim);

// Stored vector when present; otherwise MissingEmbeddingError (strict) or
// synthetic_vector (synthetic).
std::vector<double> lookup(const TextEmbeddingStore& store, std::uint64_t key,
                           LookupMode mode);

// Deterministic offline text encoder: the normalized sum of seeded random
// directions, one per feature. Features are the token count, the first four
// tokens with their position, each token, adjacent and gapped (2, 3) token
// pairs, the contexts around a token repeated within three places, and for
// non-ASCII runs single characters and character bigrams. Empty text maps to
// the zero vector.
std::vector<float> hash_encode(std::string_view text, std::uint32_t dim,
                               std::uint64_t seed);

// Lookups resolved up front for a fixed key set; read-only afterwards.
class EmbeddingTable {
 public:
  EmbeddingTable(const TextEmbeddingStore& store, LookupMode mode,
                 std::span<const std::uint64_t> keys);

  std::uint32_t dim() const { return dim_; }
  std::span<const double> at(std::uint64_t key) const;
  bool contains(std::uint64_t key) const { return index_.contains(key); }

 private:
  std::uint32_t dim_;
  std::vector<double> values_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

}  // namespace pathkg
