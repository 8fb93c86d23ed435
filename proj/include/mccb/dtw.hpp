#pragma once

// Dynamic time warping shared by demonstration alignment and the DTWD metric.
//
// Step pattern is the symmetric {(1,0),(0,1),(1,1)} set with unit weights and
// Euclidean local cost. Among minimum-cost paths the shortest one is kept, so
// the path-length normalization used by DTWD is well defined.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mccb/error.hpp"

namespace mccb::dtw {

using Index = Eigen::Index;

struct Step {
  Index i;
  Index j;
};

struct Alignment {
  double cost = 0.0;    // summed local cost along the path
  Index length = 0;     // number of matched pairs
  std::vector<Step> path;  // empty unless requested; runs (0,0) -> (Ta-1,Tb-1)

  [[nodiscard]] double normalized() const { return length > 0 ? cost / static_cast<double>(length) : 0.0; }
};

namespace detail {

enum class Move : std::uint8_t { start, diagonal, up, left };

inline bool better(double c, Index l, double best_c, Index best_l) {
  return c < best_c || (c == best_c && l < best_l);
}

}  // namespace detail

/// Optimal warping between the rows of `a` and the rows of `b`.
inline Alignment align(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, bool keep_path = false) {
  if (a.cols() != b.cols()) {
    throw config_error("dtw", "dimension mismatch (" + std::to_string(a.cols()) + " vs " +
                                  std::to_string(b.cols()) + ")");
  }
  const Index ta = a.rows();
  const Index tb = b.rows();
  if (ta == 0 || tb == 0) throw config_error("dtw", "empty sequence");

  std::vector<double> cost(static_cast<std::size_t>(ta * tb));
  std::vector<Index> len(cost.size());
  std::vector<detail::Move> move(keep_path ? cost.size() : 0);
  auto at = [tb](Index i, Index j) { return static_cast<std::size_t>(i * tb + j); };

  for (Index i = 0; i < ta; ++i) {
    for (Index j = 0; j < tb; ++j) {
      const double local = (a.row(i) - b.row(j)).norm();
      if (i == 0 && j == 0) {
        cost[at(0, 0)] = local;
        len[at(0, 0)] = 1;
        if (keep_path) move[0] = detail::Move::start;
        continue;
      }
      double best_c = std::numeric_limits<double>::infinity();
      Index best_l = std::numeric_limits<Index>::max();
      detail::Move best_m = detail::Move::start;
      // preference on exact ties: diagonal, up, left
      if (i > 0 && j > 0 && detail::better(cost[at(i - 1, j - 1)], len[at(i - 1, j - 1)], best_c, best_l)) {
        best_c = cost[at(i - 1, j - 1)];
        best_l = len[at(i - 1, j - 1)];
        best_m = detail::Move::diagonal;
      }
      if (i > 0 && detail::better(cost[at(i - 1, j)], len[at(i - 1, j)], best_c, best_l)) {
        best_c = cost[at(i - 1, j)];
        best_l = len[at(i - 1, j)];
        best_m = detail::Move::up;
      }
      if (j > 0 && detail::better(cost[at(i, j - 1)], len[at(i, j - 1)], best_c, best_l)) {
        best_c = cost[at(i, j - 1)];
        best_l = len[at(i, j - 1)];
        best_m = detail::Move::left;
      }
      cost[at(i, j)] = local + best_c;
      len[at(i, j)] = best_l + 1;
      if (keep_path) move[at(i, j)] = best_m;
    }
  }

  Alignment out;
  out.cost = cost[at(ta - 1, tb - 1)];
  out.length = len[at(ta - 1, tb - 1)];
  if (keep_path) {
    out.path.reserve(static_cast<std::size_t>(out.length));
    Index i = ta - 1;
    Index j = tb - 1;
    while (true) {
      out.path.push_back({i, j});
      const auto m = move[at(i, j)];
      if (m == detail::Move::start) break;
      if (m == detail::Move::diagonal) {
        --i;
        --j;
      } else if (m == detail::Move::up) {
        --i;
      } else {
        --j;
      }
    }
    std::reverse(out.path.begin(), out.path.end());
  }
  return out;
}

}  // namespace mccb::dtw
