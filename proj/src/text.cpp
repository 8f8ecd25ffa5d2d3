#include "pathkg/text.hpp"

#include <array>

namespace pathkg::text {

std::string hex64(std::uint64_t v) {
  std::array<char, 16> buf{};
  static constexpr char kDigits[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return {buf.data(), buf.size()};
}

std::optional<std::uint64_t> parse_hex64(std::string_view s) {
  if (s.empty() || s.size() > 16) return std::nullopt;
  std::uint64_t value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value, 16);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), ptr};
}

}  // namespace pathkg::text
