#pragma once

// Random quadruples v1..v4 with v1.x <= v2.x <= v4.x <= v3.x and
// v2.y <= v1.y <= v3.y <= v4.y.

#include <algorithm>
#include <array>

#include "ctasep/lpp.hpp"
#include "ctasep/random.hpp"

namespace support {

using ctasep::lpp::Cell;

inline std::array<Cell, 4> ordered_quadruple(std::uint64_t seed, std::int64_t span) {
  std::array<std::int64_t, 4> xs{}, ys{};
  for (std::uint64_t i = 0; i < 4; ++i) {
    const auto b = ctasep::hash_key(seed, ctasep::Domain::sample, i, 17);
    xs[i] = static_cast<std::int64_t>(b % static_cast<std::uint64_t>(span));
    ys[i] = static_cast<std::int64_t>((b >> 32) % static_cast<std::uint64_t>(span));
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  // x order: v1, v2, v4, v3; y order: v2, v1, v3, v4
  return {Cell{xs[0], ys[1]}, Cell{xs[1], ys[0]}, Cell{xs[3], ys[2]}, Cell{xs[2], ys[3]}};
}

}  // namespace support
