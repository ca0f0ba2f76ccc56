#include "rdlab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "rdlab/errors.hpp"

namespace rdlab {

std::string format_real(double v) {
  char buf[40];
  // to_chars is locale-independent; the precision form matches %.17g.
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

double parse_real(std::string_view s, std::string_view what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError(std::string(what) + ": '" + std::string(s) + "' is not a finite number");
  return v;
}

std::uint64_t parse_uint(std::string_view s, std::string_view what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    // Accept integral values written in floating notation, e.g. 1e6.
    double d = 0.0;
    auto [p2, e2] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (!s.empty() && e2 == std::errc() && p2 == s.data() + s.size() && d >= 0.0 && d < 1.8e19 &&
        std::floor(d) == d)
      return static_cast<std::uint64_t>(d);
    throw ConfigError(std::string(what) + ": '" + std::string(s) + "' is not a non-negative integer");
  }
  return v;
}

std::vector<double> parse_real_list(std::string_view s, std::string_view what) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = s.find(',', start);
    out.push_back(parse_real(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start), what));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Region parse_region(std::string_view s, std::size_t dim) {
  const std::size_t colon = s.find(':');
  if (colon == std::string_view::npos) throw ConfigError("region '" + std::string(s) + "' must be lo:hi");
  const auto lo = parse_real_list(s.substr(0, colon), "region lower bound");
  const auto hi = parse_real_list(s.substr(colon + 1), "region upper bound");
  if (lo.size() != dim || hi.size() != dim)
    throw ConfigError("region '" + std::string(s) + "' has the wrong dimension");
  Region r{Point(dim), Point(dim)};
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(lo[i] <= hi[i])) throw ConfigError("region '" + std::string(s) + "' has lower > upper");
    r.lower[i] = lo[i];
    r.upper[i] = hi[i];
  }
  return r;
}

std::uint64_t fnv1a(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace rdlab
