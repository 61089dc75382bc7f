#pragma once

// Reference implementations used only by tests. Each one is deliberately
// naive and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

// ---- calendar ---------------------------------------------------------------

struct Ymd {
  int y, m, d;
  bool operator==(const Ymd&) const = default;
};

inline bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int month_length(int y, int m) {
  static const int len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : len[m - 1];
}

inline Ymd next_day(Ymd t) {
  if (++t.d > month_length(t.y, t.m)) {
    t.d = 1;
    if (++t.m > 12) {
      t.m = 1;
      ++t.y;
    }
  }
  return t;
}

inline bool before_or_same(Ymd a, Ymd b) {
  return std::tie(a.y, a.m, a.d) <= std::tie(b.y, b.m, b.d);
}

/// Walks the calendar one day at a time: active days of [start, end] per year.
inline std::map<int, long> days_per_year(Ymd start, Ymd end) {
  std::map<int, long> days;
  for (Ymd t = start; before_or_same(t, end); t = next_day(t)) ++days[t.y];
  return days;
}

// ---- projection ---------------------------------------------------------------

/// Edge weights of one project under the product-proportional split, keyed by
/// participant index pair (i < j).
inline std::map<std::pair<int, int>, double> product_split(const std::vector<double>& w) {
  double total = 0.0, products = 0.0;
  for (double x : w) total += x;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j) products += w[i] * w[j];
  std::map<std::pair<int, int>, double> out;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j)
      if (w[i] * w[j] > 0.0)
        out[{static_cast<int>(i), static_cast<int>(j)}] = w[i] * w[j] / products * total;
  return out;
}

// ---- coreness -----------------------------------------------------------------

/// For k = 1, 2, ... repeatedly delete vertices of degree < k; a vertex's
/// coreness is the last k whose k-core still contains it.
inline std::vector<int> peel_coreness(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  for (auto [u, v] : edges) {
    adj[static_cast<std::size_t>(u)].insert(v);
    adj[static_cast<std::size_t>(v)].insert(u);
  }
  std::vector<int> core(static_cast<std::size_t>(n), 0);
  for (int k = 1;; ++k) {
    std::vector<bool> alive(static_cast<std::size_t>(n), true);
    for (bool changed = true; changed;) {
      changed = false;
      for (int v = 0; v < n; ++v) {
        if (!alive[static_cast<std::size_t>(v)]) continue;
        int deg = 0;
        for (int u : adj[static_cast<std::size_t>(v)]) deg += alive[static_cast<std::size_t>(u)];
        if (deg < k) {
          alive[static_cast<std::size_t>(v)] = false;
          changed = true;
        }
      }
    }
    bool any = false;
    for (int v = 0; v < n; ++v)
      if (alive[static_cast<std::size_t>(v)]) {
        core[static_cast<std::size_t>(v)] = k;
        any = true;
      }
    if (!any) return core;
  }
}

// ---- modularity -----------------------------------------------------------------

struct WEdge {
  int u, v;
  double w;
};

/// Newman modularity from the full double sum over vertex pairs.
inline double modularity(int n, const std::vector<WEdge>& edges, const std::vector<int>& comm) {
  std::vector<std::vector<double>> a(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  double m2 = 0.0;
  for (const auto& e : edges) {
    a[static_cast<std::size_t>(e.u)][static_cast<std::size_t>(e.v)] += e.w;
    a[static_cast<std::size_t>(e.v)][static_cast<std::size_t>(e.u)] += e.w;
    m2 += 2.0 * e.w;
  }
  std::vector<double> k(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k[static_cast<std::size_t>(i)] += a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  double q = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (comm[static_cast<std::size_t>(i)] == comm[static_cast<std::size_t>(j)])
        q += a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
             k[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(j)] / m2;
  return q / m2;
}

struct BruteForce {
  std::vector<int> best;  // restricted growth string
  double q = 0.0;
  bool unique = true;  // no other partition within 1e-9 of the optimum
};

/// Exhaustive search over every set partition (restricted growth strings).
inline BruteForce max_modularity(int n, const std::vector<WEdge>& edges) {
  BruteForce out;
  out.q = -1.0;
  std::vector<int> a(static_cast<std::size_t>(n), 0), top(static_cast<std::size_t>(n), 0);
  for (;;) {
    const double q = modularity(n, edges, a);
    if (q > out.q + 1e-9) {
      out.q = q;
      out.best = a;
      out.unique = true;
    } else if (std::abs(q - out.q) <= 1e-9) {
      out.unique = false;
    }
    // next restricted growth string
    int i = n - 1;
    while (i > 0 && a[static_cast<std::size_t>(i)] == top[static_cast<std::size_t>(i - 1)] + 1) --i;
    if (i == 0) return out;
    ++a[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) {
      a[static_cast<std::size_t>(j)] = 0;
    }
    for (int j = i; j < n; ++j)
      top[static_cast<std::size_t>(j)] =
          std::max(top[static_cast<std::size_t>(j - 1)], a[static_cast<std::size_t>(j)]);
  }
}

/// True when two membership vectors describe the same grouping.
inline bool same_grouping(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

// ---- partition similarity ---------------------------------------------------------

/// Adjusted Rand index from the four pair-agreement counts.
inline double pair_counting_ari(const std::vector<int>& a, const std::vector<int>& b) {
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) ++n11;
      else if (sa) ++n10;
      else if (sb) ++n01;
      else ++n00;
    }
  const double den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
  if (den == 0.0) return 1.0;
  return 2.0 * (n00 * n11 - n01 * n10) / den;
}

/// Mutual information normalised by the arithmetic mean of the entropies.
inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1 / n;
    pb[b[i]] += 1 / n;
    pab[{a[i], b[i]}] += 1 / n;
  }
  double ha = 0, hb = 0, mi = 0;
  for (auto [_, p] : pa) ha -= p * std::log(p);
  for (auto [_, p] : pb) hb -= p * std::log(p);
  for (auto [k, p] : pab) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  if (ha + hb == 0.0) return 1.0;
  return 2.0 * mi / (ha + hb);
}


// ---- Beta distribution -------------------------------------------------------------

/// Regularised incomplete beta I_x(a, b) by composite Simpson integration of
/// the density; adequate for a, b >= 1.
inline double beta_cdf(double x, double a, double b, int steps = 20000) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  auto f = [&](double t) { return std::pow(t, a - 1) * std::pow(1 - t, b - 1); };
  auto integrate = [&](double lo, double hi) {
    const double h = (hi - lo) / steps;
    double s = f(lo) + f(hi);
    for (int i = 1; i < steps; ++i) s += f(lo + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
  };
  return integrate(0.0, x) / integrate(0.0, 1.0);
}

}  // namespace oracle
