#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pathkg/errors.hpp"
#include "pathkg/model.hpp"
#include "pathkg/text.hpp"

namespace pathkg {

namespace {

constexpr std::string_view kCheckpointMagic = "pathkg-checkpoint";
constexpr int kCheckpointVersion = 1;

std::string next_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("truncated checkpoint header");
  return line;
}

std::string expect_field(std::istream& in, std::string_view key) {
  const auto line = next_line(in);
  if (!line.starts_with(key) || line.size() <= key.size() || line[key.size()] != ' ') {
    throw FormatError("checkpoint header: expected '" + std::string(key) + "', got '" +
                      line + "'");
  }
  return line.substr(key.size() + 1);
}

template <typename T>
T expect_number(std::istream& in, std::string_view key) {
  const auto value = expect_field(in, key);
  const auto parsed = text::parse_number<T>(value);
  if (!parsed) throw FormatError("checkpoint header: bad value for " + std::string(key));
  return *parsed;
}

}  // namespace

CheckpointInfo checkpoint_info(const KnowledgeGraph& kg, std::uint64_t seed) {
  CheckpointInfo info;
  info.seed = seed;
  info.relations = kg.relations().names();
  info.types = kg.type_vocabulary().names();
  return info;
}

void write_checkpoint(std::ostream& out, const ModelParams& params,
                      const CheckpointInfo& info) {
  std::ostringstream h;
  h << kCheckpointMagic << ' ' << kCheckpointVersion << '\n'
    << "model " << model_tag(params.kind) << '\n'
    << "d " << params.hp.d << '\n'
    << "m " << params.hp.m << '\n'
    << "H " << params.hp.H << '\n'
    << "lambda " << text::format_double(params.hp.lambda) << '\n'
    << "l2_embeddings " << (params.hp.l2_embeddings ? 1 : 0) << '\n'
    << "share_query " << (params.hp.share_query_embeddings ? 1 : 0) << '\n'
    << "seed " << info.seed << '\n'
    << "query_relations " << params.query_count << '\n'
    << "relations " << info.relations.size() << '\n';
  for (const auto& r : info.relations) h << r << '\n';
  h << "types " << info.types.size() << '\n';
  for (const auto& t : info.types) h << t << '\n';
  std::size_t tensors = 0;
  params.for_each([&](std::string_view, const Matrix&) { ++tensors; });
  h << "tensors " << tensors << '\n';
  params.for_each([&](std::string_view name, const Matrix& t) {
    h << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
  });
  h << "data\n";
  const auto header = h.str();
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  params.for_each([&](std::string_view, const Matrix& t) {
    // Column-major, matching Eigen's storage.
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(t.data()[i]));
      char bytes[4];
      for (char& b : bytes) {
        b = static_cast<char>(bits & 0xff);
        bits >>= 8;
      }
      out.write(bytes, 4);
    }
  });
}

std::pair<ModelParams, CheckpointInfo> read_checkpoint(std::istream& in) {
  const auto magic = next_line(in);
  if (magic != std::string(kCheckpointMagic) + " " + std::to_string(kCheckpointVersion)) {
    throw FormatError("not a version-1 pathkg checkpoint");
  }
  const auto kind = parse_model_kind(expect_field(in, "model"));
  HyperParams hp;
  hp.d = expect_number<std::uint32_t>(in, "d");
  hp.m = expect_number<std::uint32_t>(in, "m");
  hp.H = expect_number<std::uint32_t>(in, "H");
  hp.lambda = expect_number<double>(in, "lambda");
  hp.l2_embeddings = expect_number<int>(in, "l2_embeddings") != 0;
  hp.share_query_embeddings = expect_number<int>(in, "share_query") != 0;
  CheckpointInfo info;
  info.seed = expect_number<std::uint64_t>(in, "seed");
  const auto query_count = expect_number<std::uint32_t>(in, "query_relations");
  const auto relation_count = expect_number<std::size_t>(in, "relations");
  for (std::size_t i = 0; i < relation_count; ++i) info.relations.push_back(next_line(in));
  const auto type_count = expect_number<std::size_t>(in, "types");
  for (std::size_t i = 0; i < type_count; ++i) info.types.push_back(next_line(in));

  auto params = init_params(kind, hp, static_cast<std::uint32_t>(relation_count),
                            query_count, static_cast<std::uint32_t>(type_count), 0);
  const auto tensors = expect_number<std::size_t>(in, "tensors");
  std::size_t expected = 0;
  params.for_each([&](std::string_view, const Matrix&) { ++expected; });
  if (tensors != expected) throw FormatError("checkpoint tensor count mismatch");
  params.for_each([&](std::string_view name, const Matrix& t) {
    const auto line = next_line(in);
    const auto parts = text::split(line, ' ');
    if (parts.size() != 3 || parts[0] != name ||
        text::parse_number<Eigen::Index>(parts[1]) != t.rows() ||
        text::parse_number<Eigen::Index>(parts[2]) != t.cols()) {
      throw FormatError("checkpoint tensor table does not match '" + std::string(name) + "'");
    }
  });
  if (next_line(in) != "data") throw FormatError("checkpoint header missing 'data'");

  std::size_t offset = 0;
  params.for_each([&](std::string_view name, Matrix& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      unsigned char bytes[4];
      in.read(reinterpret_cast<char*>(bytes), 4);
      if (in.gcount() != 4) {
        throw FormatError("truncated checkpoint tensor '" + std::string(name) +
                          "' at payload byte " + std::to_string(offset));
      }
      offset += 4;
      const std::uint32_t bits = std::uint32_t{bytes[0]} | (std::uint32_t{bytes[1]} << 8) |
                                 (std::uint32_t{bytes[2]} << 16) |
                                 (std::uint32_t{bytes[3]} << 24);
      t.data()[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
  });
  return {std::move(params), std::move(info)};
}

void write_checkpoint_file(const std::string& path, const ModelParams& params,
                           const CheckpointInfo& info) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_checkpoint(out, params, info);
}

std::pair<ModelParams, CheckpointInfo> read_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_checkpoint(in);
}

void check_compatible(const CheckpointInfo& info, const KnowledgeGraph& kg) {
  if (info.relations != kg.relations().names()) {
    throw ConfigError("checkpoint relation vocabulary does not match the graph");
  }
  if (info.types != kg.type_vocabulary().names()) {
    throw ConfigError("checkpoint type vocabulary does not match the graph");
  }
}

}  // namespace pathkg
