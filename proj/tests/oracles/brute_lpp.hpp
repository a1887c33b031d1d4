#pragma once

// Exhaustive enumeration of up-right paths in small boxes.

#include <algorithm>
#include <limits>
#include <vector>

#include "ctasep/lpp.hpp"

namespace oracle {

using ctasep::lpp::Cell;

template <class Visit>
void each_path(Cell u, Cell v, std::vector<Cell>& cur, const Visit& visit) {
  cur.push_back(u);
  if (u == v) visit(cur);
  if (u.x < v.x) each_path(Cell{u.x + 1, u.y}, v, cur, visit);
  if (u.y < v.y) each_path(Cell{u.x, u.y + 1}, v, cur, visit);
  cur.pop_back();
}

struct BruteResult {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<Cell>> argmax;
};

/// Max over up-right paths of the weight sum excluding the endpoint.
template <class W>
BruteResult brute_lpt(const W& w, Cell u, Cell v) {
  BruteResult best;
  std::vector<Cell> cur;
  each_path(u, v, cur, [&](const std::vector<Cell>& p) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) s += w(p[i]);
    if (s > best.value) {
      best.value = s;
      best.argmax = {p};
    } else if (s == best.value) {
      best.argmax.push_back(p);
    }
  });
  return best;
}

}  // namespace oracle
