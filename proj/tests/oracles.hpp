// Brute-force reference computations used by the tests. None of these call
// into the enumeration, averaging or ladder code under test; they work from
// coordinates and raw formulas only.
#ifndef ELASTIC_TESTS_ORACLES_HPP
#define ELASTIC_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

namespace oracle {

using Tuple = std::vector<std::int64_t>;

struct Torus {
  int d;
  std::int64_t L;

  std::int64_t size() const {
    std::int64_t N = 1;
    for (int i = 0; i < d; ++i) N *= L;
    return N;
  }
  std::vector<std::int64_t> coords(std::int64_t v) const {
    std::vector<std::int64_t> c(static_cast<std::size_t>(d));
    for (int i = d - 1; i >= 0; --i) {
      c[static_cast<std::size_t>(i)] = v % L;
      v /= L;
    }
    return c;
  }
  std::int64_t id(const std::vector<std::int64_t>& c) const {
    std::int64_t v = 0;
    for (auto x : c) v = v * L + ((x % L) + L) % L;
    return v;
  }
  double dist(std::int64_t a, std::int64_t b, bool linf = false) const {
    auto ca = coords(a);
    auto cb = coords(b);
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      auto delta = std::abs(ca[static_cast<std::size_t>(i)] - cb[static_cast<std::size_t>(i)]);
      delta = std::min(delta, L - delta);
      if (linf) {
        acc = std::max(acc, static_cast<double>(delta));
      } else {
        acc += static_cast<double>(delta * delta);
      }
    }
    return linf ? acc : std::sqrt(acc);
  }
};

/// Every ordered tuple of n distinct vertices starting at `first`.
inline void for_each_completion(std::int64_t N, int n, std::int64_t first,
                                const std::function<void(const Tuple&)>& fn) {
  Tuple t{first};
  std::function<void()> rec = [&]() {
    if (static_cast<int>(t.size()) == n) {
      fn(t);
      return;
    }
    for (std::int64_t v = 0; v < N; ++v) {
      if (std::find(t.begin(), t.end(), v) != t.end()) continue;
      t.push_back(v);
      rec();
      t.pop_back();
    }
  };
  rec();
}

/// Normalized activity from a raw formula: f = raw / S with
/// S = (1/(n-1)!) sum over ordered distinct completions of vertex 0.
struct Activity {
  Torus torus;
  int n;
  std::function<double(const Tuple&)> raw;
  double norm = 1.0;

  Activity(Torus t, int tile, std::function<double(const Tuple&)> r) : torus(t), n(tile), raw(std::move(r)) {
    double s = 0.0;
    for_each_completion(torus.size(), n, 0, [&](const Tuple& x) { s += raw(x); });
    double fact = 1.0;
    for (int k = 2; k < n; ++k) fact *= k;
    norm = s / fact;
  }
  double operator()(const Tuple& x) const { return raw(x) / norm; }
};

inline Activity pair_exponential(Torus t, int n, double scale, bool linf = false) {
  return Activity(t, n, [t, scale, linf](const Tuple& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = i + 1; j < x.size(); ++j) s += t.dist(x[i], x[j], linf);
    }
    return std::exp(-s / scale);
  });
}

inline Activity constant(Torus t, int n) {
  return Activity(t, n, [](const Tuple&) { return 1.0; });
}

/// Set partitions of {0..N-1} into blocks of size n, via restricted growth
/// strings; fn receives the blocks.
inline void for_each_tiling(std::int64_t N, int n, const std::function<void(const std::vector<Tuple>&)>& fn) {
  std::vector<std::int64_t> a(static_cast<std::size_t>(N), 0);
  std::vector<std::int64_t> counts;
  std::function<void(std::int64_t, std::int64_t)> rec = [&](std::int64_t pos, std::int64_t blocks) {
    if (pos == N) {
      std::vector<Tuple> out(static_cast<std::size_t>(blocks));
      for (std::int64_t v = 0; v < N; ++v) out[static_cast<std::size_t>(a[static_cast<std::size_t>(v)])].push_back(v);
      fn(out);
      return;
    }
    for (std::int64_t b = 0; b <= blocks && b < N / n; ++b) {
      if (b < blocks && counts[static_cast<std::size_t>(b)] == n) continue;
      a[static_cast<std::size_t>(pos)] = b;
      if (b == blocks) counts.push_back(0);
      ++counts[static_cast<std::size_t>(b)];
      rec(pos + 1, b == blocks ? blocks + 1 : blocks);
      --counts[static_cast<std::size_t>(b)];
      if (b == blocks) counts.pop_back();
    }
  };
  rec(0, 0);
}

/// Sum over tilings of the product of block activities.
inline double partition_function(std::int64_t N, int n, const std::function<double(const Tuple&)>& f) {
  long double z = 0.0L;
  for_each_tiling(N, n, [&](const std::vector<Tuple>& blocks) {
    long double w = 1.0L;
    for (const auto& b : blocks) w *= f(b);
    z += w;
  });
  return static_cast<double>(z);
}

inline double lfact(std::int64_t r) { return std::lgamma(static_cast<double>(r) + 1.0); }

/// Constant-weight closed form: tilings times f^{N/n}, f = (n-1)!(N-n)!/(N-1)!.
inline double log_z0_hat(std::int64_t N, int n) {
  const double blocks = static_cast<double>(N / n);
  const double log_tilings = lfact(N) - lfact(N / n) - blocks * lfact(n);
  const double log_f = lfact(n - 1) + lfact(N - n) - lfact(N - 1);
  return log_tilings + blocks * log_f;
}

inline double log_z_plus(std::int64_t N, int n, std::int64_t nbar) {
  const double blocks = static_cast<double>(N / n);
  const double boxes = static_cast<double>(N / nbar);
  return -lfact(N / n) + blocks * std::log(static_cast<double>(N)) +
         boxes * (lfact(nbar) - static_cast<double>(nbar) * std::log(static_cast<double>(nbar))) -
         blocks * std::log(static_cast<double>(n));
}

/// Box index of a vertex for boxes of edge lb.
inline std::int64_t box(const Torus& t, std::int64_t v, std::int64_t lb) {
  auto c = t.coords(v);
  std::int64_t b = 0;
  for (auto x : c) b = b * (t.L / lb) + x / lb;
  return b;
}

/// fbar(x): mean of f over ordered distinct tuples with the same box
/// sequence as x.
inline double coarse(const Activity& f, std::int64_t lb, const Tuple& x) {
  const auto N = f.torus.size();
  std::vector<std::int64_t> target;
  for (auto v : x) target.push_back(box(f.torus, v, lb));
  double s = 0.0;
  std::int64_t count = 0;
  Tuple t;
  std::function<void()> rec = [&]() {
    if (t.size() == x.size()) {
      s += f(t);
      ++count;
      return;
    }
    for (std::int64_t v = 0; v < N; ++v) {
      if (box(f.torus, v, lb) != target[t.size()]) continue;
      if (std::find(t.begin(), t.end(), v) != t.end()) continue;
      t.push_back(v);
      rec();
      t.pop_back();
    }
  };
  rec();
  return s / static_cast<double>(count);
}

/// Z' by brute force: ordered sequences of N/n n-subsets (repetition allowed)
/// whose per-box vertex counts all equal nbar.
inline double z_prime(const Activity& f, std::int64_t lb) {
  const auto N = f.torus.size();
  const int n = f.n;
  std::int64_t nbar = 1;
  for (int i = 0; i < f.torus.d; ++i) nbar *= lb;
  const auto boxes = N / nbar;
  std::vector<Tuple> subsets;
  std::vector<double> weight;
  Tuple cur;
  std::function<void(std::int64_t)> gen = [&](std::int64_t start) {
    if (static_cast<int>(cur.size()) == n) {
      subsets.push_back(cur);
      weight.push_back(coarse(f, lb, cur));
      return;
    }
    for (std::int64_t v = start; v < N; ++v) {
      cur.push_back(v);
      gen(v + 1);
      cur.pop_back();
    }
  };
  gen(0);
  const auto blocks = N / n;
  std::vector<std::int64_t> occ(static_cast<std::size_t>(boxes), 0);
  long double total = 0.0L;
  std::function<void(std::int64_t, long double)> rec = [&](std::int64_t depth, long double w) {
    if (depth == blocks) {
      total += w;
      return;
    }
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      bool ok = true;
      for (auto v : subsets[s]) {
        if (++occ[static_cast<std::size_t>(box(f.torus, v, lb))] > nbar) ok = false;
      }
      if (ok) rec(depth + 1, w * weight[s]);
      for (auto v : subsets[s]) --occ[static_cast<std::size_t>(box(f.torus, v, lb))];
    }
  };
  rec(0, 1.0L);
  const double log_factors = -lfact(blocks) + static_cast<double>(boxes) *
                                                  (lfact(nbar) - static_cast<double>(nbar) *
                                                                     std::log(static_cast<double>(nbar)));
  return std::log(static_cast<double>(total)) + log_factors;
}

/// Largest |f(x + u) - f(x)| / f(x) over all tuples with first member 0 and
/// every single-member unit move.
inline double smoothness(const Activity& f) {
  const auto N = f.torus.size();
  double worst = 0.0;
  Tuple t{0};
  std::function<void()> rec = [&]() {
    if (static_cast<int>(t.size()) == f.n) {
      const double base = f(t);
      for (std::size_t k = 0; k < t.size(); ++k) {
        for (int axis = 0; axis < f.torus.d; ++axis) {
          for (int dir : {-1, 1}) {
            auto c = f.torus.coords(t[k]);
            c[static_cast<std::size_t>(axis)] += dir;
            Tuple moved = t;
            moved[k] = f.torus.id(c);
            worst = std::max(worst, std::abs(f(moved) - base) / base);
          }
        }
      }
      return;
    }
    for (std::int64_t v = 0; v < N; ++v) {
      t.push_back(v);
      rec();
      t.pop_back();
    }
  };
  rec();
  return worst;
}

}  // namespace oracle

#endif  // ELASTIC_TESTS_ORACLES_HPP
