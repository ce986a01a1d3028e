#include "subdiff/spectral.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include <lapacke.h>

namespace subdiff {

namespace {

constexpr double kSignThreshold = 1e-10;

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > kSignThreshold) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

/// The `count` smallest eigenpairs of symmetric `m`, ascending.
void lowest_eigenpairs(Eigen::MatrixXd m, Eigen::Index count, Eigen::VectorXd& values,
                       Eigen::MatrixXd& vectors) {
  const auto n = static_cast<lapack_int>(m.rows());
  lapack_int found = 0;
  Eigen::VectorXd w(n);
  vectors.resize(n, count);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, m.data(), n, 0.0, 0.0, 1,
                     static_cast<lapack_int>(count), 0.0, &found, w.data(), vectors.data(), n,
                     support.data());
  if (info != 0 || found != count) {
    throw std::runtime_error("laplacian_eigens: dsyevr failed (info=" + std::to_string(info) + ")");
  }
  values = w.head(count);
}

}  // namespace

Eigen::MatrixXd laplacian_matrix(const Graph& g) {
  Eigen::MatrixXd lap = -g.adjacency_matrix();
  for (NodeId v = 0; v < g.num_nodes(); ++v) lap(v, v) = static_cast<double>(g.degree(v));
  return lap;
}

LaplacianEigens laplacian_eigens(const Graph& g, int k) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  if (k < 1 || k >= n) {
    throw std::invalid_argument("laplacian_eigens: need 1 <= k < n (k=" + std::to_string(k) +
                                ", n=" + std::to_string(n) + ")");
  }
  if (!is_connected(g)) {
    throw DisconnectedGraphError(
        "laplacian_eigens: graph is disconnected (zero eigenvalue is repeated); "
        "take the largest connected component first");
  }
  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;
  // Only the low end of the spectrum is needed. Widen the window until the tie
  // group straddling index k is complete.
  Eigen::Index want = std::min<Eigen::Index>(n, k + 8);
  for (;;) {
    lowest_eigenpairs(laplacian_matrix(g), want, vals, vecs);
    if (want == n) break;
    const double edge = vals(want - 1);
    if (std::abs(edge - vals(k)) > 1e-9 * std::max(1.0, std::abs(edge))) break;
    want = std::min<Eigen::Index>(n, 2 * want);
  }

  // Connected: exactly one zero eigenvalue, which the solver returns first.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(vals.size() - 1));
  std::iota(order.begin(), order.end(), Eigen::Index{1});
  for (auto i : order) normalize_sign(vecs.col(i));

  auto tied = [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(vals(a) - vals(b)) <= 1e-9 * std::max(1.0, std::abs(vals(a)));
  };
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && tied(order[start], order[end])) ++end;
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(start),
              order.begin() + static_cast<std::ptrdiff_t>(end),
              [&](Eigen::Index a, Eigen::Index b) {
                Eigen::VectorXd va = vecs.col(a);
                Eigen::VectorXd vb = vecs.col(b);
                return lex_less(va, vb);
              });
    if (end >= static_cast<std::size_t>(k)) break;
    start = end;
  }

  LaplacianEigens out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  for (int j = 0; j < k; ++j) {
    out.values(j) = vals(order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = vecs.col(order[static_cast<std::size_t>(j)]).normalized();
  }
  return out;
}

}  // namespace subdiff
