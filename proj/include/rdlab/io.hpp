#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rdlab/phase_space.hpp"

namespace rdlab {

/// Locale-independent "%.17g".
[[nodiscard]] std::string format_real(double v);

/// Strict full-string parse; throws ConfigError naming `what` on failure.
[[nodiscard]] double parse_real(std::string_view s, std::string_view what);
[[nodiscard]] std::uint64_t parse_uint(std::string_view s, std::string_view what);
/// Comma-separated reals.
[[nodiscard]] std::vector<double> parse_real_list(std::string_view s, std::string_view what);
/// "lo0,lo1:hi0,hi1" with `dim` entries on each side.
[[nodiscard]] Region parse_region(std::string_view s, std::size_t dim);

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a(std::string_view data) noexcept;
[[nodiscard]] std::string hex64(std::uint64_t v);

}  // namespace rdlab
