#pragma once

// Reference implementations the library is checked against. Each one is
// written from the definition, deliberately naively, and shares no code with
// valueprobe::core.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

// Item means m[1..24]; slot 0 is unused. Order: pdi idv mas uai lto ivr.
inline std::array<std::int64_t, 6> hofstede(const std::array<std::int64_t, 25>& m,
                                            const std::array<std::int64_t, 6>& c = {}) {
  return {
      35 * (m[7] - m[2]) + 25 * (m[20] - m[23]) + c[0],
      35 * (m[4] - m[1]) + 35 * (m[9] - m[6]) + c[1],
      35 * (m[5] - m[3]) + 35 * (m[8] - m[10]) + c[2],
      40 * (m[18] - m[15]) + 25 * (m[21] - m[24]) + c[3],
      40 * (m[13] - m[14]) + 25 * (m[19] - m[22]) + c[4],
      35 * (m[12] - m[11]) + 40 * (m[17] - m[16]) + c[5],
  };
}

// 1 - 6 sum d^2 / (n (n^2 - 1)); valid only without ties.
inline double spearman_rank_difference(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto rank_of = [](const std::vector<double>& v, std::size_t i) {
    std::size_t below = 0;
    for (double w : v) below += w < v[i];
    return static_cast<double>(below + 1);
  };
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = rank_of(x, i) - rank_of(y, i);
    d2 += d * d;
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

// Midrank by counting: (#less) + (#equal + 1) / 2.
inline std::vector<double> midranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double num = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return num / std::sqrt(vx * vy);
}

inline double spearman_average_ranks(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(midranks(x), midranks(y));
}

// U of `a`: pairs (i, j) with a_i > b_j, ties counting one half.
inline double mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a) {
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  }
  return u;
}

// Exact two-sided p-value by enumerating every split of the pooled sample
// into groups of the original sizes. Feasible for n_a + n_b <= 12 or so.
inline double mann_whitney_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size(), na = a.size();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(na), true);
  std::size_t total = 0, lower = 0, upper = 0;
  const double u_obs = mann_whitney_u(a, b);
  do {
    std::vector<double> ga, gb;
    for (std::size_t i = 0; i < n; ++i) (pick[i] ? ga : gb).push_back(pooled[i]);
    const double u = mann_whitney_u(ga, gb);
    ++total;
    if (u <= u_obs + 1e-9) ++lower;
    if (u >= u_obs - 1e-9) ++upper;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  // Doubled smaller tail, capped at one.
  const double tail = static_cast<double>(std::min(lower, upper)) / static_cast<double>(total);
  return std::min(1.0, 2.0 * tail);
}

}  // namespace oracle
