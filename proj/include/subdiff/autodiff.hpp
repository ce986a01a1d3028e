#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace subdiff::ad {

class Tape;

/// Handle to a matrix value recorded on a Tape.
struct Var {
  Tape* tape{nullptr};
  int id{-1};

  const Eigen::MatrixXd& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

/// Reverse-mode tape over dense double matrices. Each recorded op keeps its
/// output value and a closure that pushes the output gradient to its inputs.
/// Ops whose inputs need no gradient record no closure.
class Tape {
 public:
  Var constant(Eigen::MatrixXd value);
  Var variable(Eigen::MatrixXd value);

  const Eigen::MatrixXd& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  bool needs_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].needs_grad; }

  /// Seeds d(out)/d(out) = 1 for a 1x1 `out` and runs the reverse sweep.
  void backward(Var out);
  /// Gradient after backward(); zeros if nothing reached `v`.
  Eigen::MatrixXd grad(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

  // Used by op implementations.
  using Backward = std::function<void(Tape&, const Eigen::MatrixXd&)>;
  Var record(Eigen::MatrixXd value, std::initializer_list<Var> inputs, Backward back);
  void accumulate(Var v, const Eigen::MatrixXd& g);

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    Backward back;
    bool needs_grad{false};
  };
  std::vector<Node> nodes_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);  ///< matrix product
Var operator*(double s, Var a);

Var cmul(Var a, Var b);               ///< elementwise product
Var cmul(Var a, const Eigen::MatrixXd& c);
Var add_row(Var x, Var row);          ///< x + 1 * row (row broadcast)
Var add_const(Var x, const Eigen::MatrixXd& c);
Var scalar_mul(Var x, Var s);         ///< x * s, s is 1x1
Var element(Var x, Eigen::Index i, Eigen::Index j);
Var cols(Var x, Eigen::Index start, Eigen::Index count);
Var hcat(Var a, Var b);
Var transpose(Var x);
Var tanh(Var x);
Var silu(Var x);                      ///< x * sigmoid(x)
Var sum(Var x);                       ///< 1x1
Var row_sums(Var x);                  ///< n x 1
Var col_sums(Var x);                  ///< 1 x m
Var div_rows(Var x, Var d);           ///< row i of x divided by d(i), d is n x 1
Var row_softmax(Var x);

/// Sum over entries of w_ij * (logsumexp(z0_ij, z1_ij) - z_{target_ij}), with
/// target entries in {0,1}.
Var binary_ce(Var z0, Var z1, const Eigen::MatrixXd& target, const Eigen::MatrixXd& weight);
/// Sum over rows of weight * cross-entropy(logits row, labels[row]).
Var softmax_ce(Var logits, const std::vector<int>& labels, double weight);

}  // namespace subdiff::ad
