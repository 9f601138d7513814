#include "core/kmeans.hpp"

#include <cmath>
#include <limits>

#include "core/rng.hpp"

namespace coper {

namespace {

double sq_dist(const Matrix& x, std::size_t i, const Matrix& centers, std::size_t c) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.cols; ++d) {
    double diff = x(i, d) - centers(c, d);
    s += diff * diff;
  }
  return s;
}

Matrix kmeanspp_init(const Matrix& x, int k, Rng& rng) {
  const std::size_t n = x.rows;
  Matrix centers(static_cast<std::size_t>(k), x.cols);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  for (std::size_t d = 0; d < x.cols; ++d) centers(0, d) = x(first, d);

  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = sq_dist(x, i, centers, static_cast<std::size_t>(c - 1));
      if (d < best[i]) best[i] = d;
      total += best[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += best[i];
        if (acc >= r) { pick = i; break; }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    for (std::size_t d = 0; d < x.cols; ++d)
      centers(static_cast<std::size_t>(c), d) = x(pick, d);
  }
  return centers;
}

struct RunResult {
  Matrix centers;
  std::vector<int> assignment;
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

RunResult lloyd(const Matrix& x, int k, int max_iter, double tol, Rng rng) {
  const std::size_t n = x.rows;
  RunResult r;
  r.centers = kmeanspp_init(x, k, rng);
  r.assignment.assign(n, 0);

  for (int iter = 0; iter < max_iter; ++iter) {
    // assignment step; ties go to the lower center index
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best_c = 0;
      double best_d = sq_dist(x, i, r.centers, 0);
      for (int c = 1; c < k; ++c) {
        double d = sq_dist(x, i, r.centers, static_cast<std::size_t>(c));
        if (d < best_d) { best_d = d; best_c = c; }
      }
      r.assignment[i] = best_c;
      inertia += best_d;
    }
    r.trace.push_back(inertia);
    r.inertia = inertia;
    r.iterations = iter + 1;

    // update step
    Matrix next(static_cast<std::size_t>(k), x.cols);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c = static_cast<std::size_t>(r.assignment[i]);
      ++counts[c];
      for (std::size_t d = 0; d < x.cols; ++d) next(c, d) += x(i, d);
    }
    std::vector<char> stolen(n, 0);
    for (int c = 0; c < k; ++c) {
      std::size_t cc = static_cast<std::size_t>(c);
      if (counts[cc] > 0) {
        for (std::size_t d = 0; d < x.cols; ++d)
          next(cc, d) /= static_cast<double>(counts[cc]);
      } else {
        // empty-cluster repair: reseed at the point farthest from its own
        // assigned center; each repair in a pass takes a distinct point
        std::size_t worst = n;
        double worst_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (stolen[i]) continue;
          double d = sq_dist(x, i, r.centers, static_cast<std::size_t>(r.assignment[i]));
          if (d > worst_d) { worst_d = d; worst = i; }
        }
        if (worst == n) worst = 0;
        stolen[worst] = 1;
        for (std::size_t d = 0; d < x.cols; ++d) next(cc, d) = x(worst, d);
        r.assignment[worst] = c;
      }
    }

    double moved = 0.0;
    for (std::size_t i = 0; i < next.data.size(); ++i) {
      double diff = next.data[i] - r.centers.data[i];
      moved += diff * diff;
    }
    r.centers = std::move(next);
    if (std::sqrt(moved) <= tol) break;
  }

  // final assignment + inertia against the last centers
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int best_c = 0;
    double best_d = sq_dist(x, i, r.centers, 0);
    for (int c = 1; c < k; ++c) {
      double d = sq_dist(x, i, r.centers, static_cast<std::size_t>(c));
      if (d < best_d) { best_d = d; best_c = c; }
    }
    r.assignment[i] = best_c;
    inertia += best_d;
  }
  r.trace.push_back(inertia);
  r.inertia = inertia;
  return r;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, int k, int restarts, int max_iter, double tol,
                    std::uint64_t seed, std::vector<double>* inertia_trace) {
  if (k < 1 || x.rows < static_cast<std::size_t>(k) || x.empty())
    fail(ErrorCode::InvalidParameter, "kmeans: need N >= K >= 1");
  if (restarts < 1) restarts = 1;

  Rng root(seed);
  RunResult best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    RunResult run = lloyd(x, k, max_iter, tol, root.derive(static_cast<std::uint64_t>(r)));
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }

  if (inertia_trace) *inertia_trace = best.trace;
  KMeansResult out;
  out.centers = std::move(best.centers);
  out.assignment = std::move(best.assignment);
  out.inertia = best.inertia;
  out.iterations = best.iterations;
  return out;
}

}  // namespace coper
