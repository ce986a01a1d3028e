#pragma once

#include <Eigen/Dense>

#include "subdiff/graph.hpp"

namespace subdiff {

struct LaplacianEigens {
  Eigen::VectorXd values;   ///< k smallest nonzero eigenvalues of D - A, ascending
  Eigen::MatrixXd vectors;  ///< n x k, unit columns
};

/// Smallest `k` nonzero eigenpairs of the combinatorial Laplacian.
///
/// Each vector is sign-normalized so its first entry with |x| > 1e-10 is
/// positive. Eigenvalues within 1e-9 * max(1, lambda) of each other are a tie
/// group; vectors inside a group are ordered lexicographically.
/// Throws DisconnectedGraphError for disconnected input.
LaplacianEigens laplacian_eigens(const Graph& g, int k);

Eigen::MatrixXd laplacian_matrix(const Graph& g);

}  // namespace subdiff
