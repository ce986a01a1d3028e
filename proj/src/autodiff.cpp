#include "subdiff/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace subdiff::ad {

using Eigen::MatrixXd;

const MatrixXd& Var::value() const { return tape->value(*this); }

Var Tape::constant(MatrixXd value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::variable(MatrixXd value) {
  nodes_.push_back(Node{std::move(value), {}, {}, true});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::record(MatrixXd value, std::initializer_list<Var> inputs, Backward back) {
  bool needs = false;
  for (Var in : inputs) needs = needs || needs_grad(in);
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(back) : Backward{}, needs});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

void Tape::accumulate(Var v, const MatrixXd& g) {
  auto& node = nodes_[static_cast<std::size_t>(v.id)];
  if (!node.needs_grad) return;
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

void Tape::backward(Var out) {
  if (value(out).rows() != 1 || value(out).cols() != 1) {
    throw std::invalid_argument("backward: output must be 1x1");
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[static_cast<std::size_t>(out.id)].grad = MatrixXd::Ones(1, 1);
  for (int i = out.id; i >= 0; --i) {
    auto& node = nodes_[static_cast<std::size_t>(i)];
    if (node.back && node.grad.size() > 0) node.back(*this, node.grad);
  }
}

MatrixXd Tape::grad(Var v) const {
  const auto& node = nodes_[static_cast<std::size_t>(v.id)];
  if (node.grad.size() == 0) return MatrixXd::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

namespace {

void check_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Var operator+(Var a, Var b) {
  check_same_shape(a, b, "add");
  return a.tape->record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const MatrixXd& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var operator-(Var a, Var b) {
  check_same_shape(a, b, "sub");
  return a.tape->record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const MatrixXd& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var operator*(Var a, Var b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  return a.tape->record(a.value() * b.value(), {a, b}, [a, b](Tape& t, const MatrixXd& g) {
    if (t.needs_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.needs_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

Var operator*(double s, Var a) {
  return a.tape->record(s * a.value(), {a}, [a, s](Tape& t, const MatrixXd& g) { t.accumulate(a, s * g); });
}

Var cmul(Var a, Var b) {
  check_same_shape(a, b, "cmul");
  return a.tape->record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, const MatrixXd& g) {
    if (t.needs_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
    if (t.needs_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var cmul(Var a, const MatrixXd& c) {
  return a.tape->record(a.value().cwiseProduct(c), {a},
                        [a, c](Tape& t, const MatrixXd& g) { t.accumulate(a, g.cwiseProduct(c)); });
}

Var add_row(Var x, Var row) {
  if (row.rows() != 1 || row.cols() != x.cols()) throw std::invalid_argument("add_row: shape mismatch");
  MatrixXd out = x.value().rowwise() + row.value().row(0);
  return x.tape->record(std::move(out), {x, row}, [x, row](Tape& t, const MatrixXd& g) {
    t.accumulate(x, g);
    if (t.needs_grad(row)) t.accumulate(row, g.colwise().sum());
  });
}

Var add_const(Var x, const MatrixXd& c) {
  return x.tape->record(x.value() + c, {x}, [x](Tape& t, const MatrixXd& g) { t.accumulate(x, g); });
}

Var scalar_mul(Var x, Var s) {
  if (s.rows() != 1 || s.cols() != 1) throw std::invalid_argument("scalar_mul: s must be 1x1");
  return x.tape->record(x.value() * s.value()(0, 0), {x, s}, [x, s](Tape& t, const MatrixXd& g) {
    if (t.needs_grad(x)) t.accumulate(x, g * s.value()(0, 0));
    if (t.needs_grad(s)) t.accumulate(s, MatrixXd::Constant(1, 1, g.cwiseProduct(x.value()).sum()));
  });
}

Var element(Var x, Eigen::Index i, Eigen::Index j) {
  return x.tape->record(MatrixXd::Constant(1, 1, x.value()(i, j)), {x}, [x, i, j](Tape& t, const MatrixXd& g) {
    MatrixXd full = MatrixXd::Zero(x.rows(), x.cols());
    full(i, j) = g(0, 0);
    t.accumulate(x, full);
  });
}

Var cols(Var x, Eigen::Index start, Eigen::Index count) {
  return x.tape->record(x.value().middleCols(start, count), {x},
                        [x, start, count](Tape& t, const MatrixXd& g) {
                          MatrixXd full = MatrixXd::Zero(x.rows(), x.cols());
                          full.middleCols(start, count) = g;
                          t.accumulate(x, full);
                        });
}

Var hcat(Var a, Var b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("hcat: row mismatch");
  MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, const MatrixXd& g) {
    t.accumulate(a, g.leftCols(a.cols()));
    t.accumulate(b, g.rightCols(b.cols()));
  });
}

Var transpose(Var x) {
  return x.tape->record(x.value().transpose(), {x},
                        [x](Tape& t, const MatrixXd& g) { t.accumulate(x, g.transpose()); });
}

Var tanh(Var x) {
  MatrixXd y = x.value().array().tanh().matrix();
  return x.tape->record(y, {x}, [x, y](Tape& t, const MatrixXd& g) {
    t.accumulate(x, g.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var silu(Var x) {
  const Eigen::ArrayXXd sig = 1.0 / (1.0 + (-x.value().array()).exp());
  MatrixXd y = (x.value().array() * sig).matrix();
  return x.tape->record(std::move(y), {x}, [x, sig](Tape& t, const MatrixXd& g) {
    const Eigen::ArrayXXd d = sig * (1.0 + x.value().array() * (1.0 - sig));
    t.accumulate(x, (g.array() * d).matrix());
  });
}

Var sum(Var x) {
  return x.tape->record(MatrixXd::Constant(1, 1, x.value().sum()), {x}, [x](Tape& t, const MatrixXd& g) {
    t.accumulate(x, MatrixXd::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var row_sums(Var x) {
  return x.tape->record(x.value().rowwise().sum(), {x}, [x](Tape& t, const MatrixXd& g) {
    t.accumulate(x, g.replicate(1, x.cols()));
  });
}

Var col_sums(Var x) {
  return x.tape->record(x.value().colwise().sum(), {x}, [x](Tape& t, const MatrixXd& g) {
    t.accumulate(x, g.replicate(x.rows(), 1));
  });
}

Var div_rows(Var x, Var d) {
  if (d.cols() != 1 || d.rows() != x.rows()) throw std::invalid_argument("div_rows: shape mismatch");
  const Eigen::VectorXd inv = d.value().col(0).cwiseInverse();
  MatrixXd y = inv.asDiagonal() * x.value();
  return x.tape->record(y, {x, d}, [x, d, inv, y](Tape& t, const MatrixXd& g) {
    if (t.needs_grad(x)) t.accumulate(x, inv.asDiagonal() * g);
    if (t.needs_grad(d)) {
      Eigen::VectorXd gd = -(g.cwiseProduct(y).rowwise().sum()).cwiseProduct(inv);
      t.accumulate(d, gd);
    }
  });
}

Var row_softmax(Var x) {
  MatrixXd y = x.value();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double top = y.row(i).maxCoeff();
    y.row(i) = (y.row(i).array() - top).exp().matrix();
    y.row(i) /= y.row(i).sum();
  }
  return x.tape->record(y, {x}, [x, y](Tape& t, const MatrixXd& g) {
    Eigen::VectorXd dot = g.cwiseProduct(y).rowwise().sum();
    MatrixXd gx = y.cwiseProduct(g - dot.replicate(1, y.cols()));
    t.accumulate(x, gx);
  });
}

Var binary_ce(Var z0, Var z1, const MatrixXd& target, const MatrixXd& weight) {
  check_same_shape(z0, z1, "binary_ce");
  // With d = z1 - z0: loss = softplus(d) - target * d.
  const Eigen::ArrayXXd d = (z1.value() - z0.value()).array();
  const Eigen::ArrayXXd softplus = d.max(0.0) + (-d.abs()).exp().log1p();
  const double value = (weight.array() * (softplus - target.array() * d)).sum();
  return z0.tape->record(MatrixXd::Constant(1, 1, value), {z0, z1},
                         [z0, z1, d, target, weight](Tape& t, const MatrixXd& g) {
                           const Eigen::ArrayXXd p1 = 1.0 / (1.0 + (-d).exp());
                           MatrixXd gd = (g(0, 0) * weight.array() * (p1 - target.array())).matrix();
                           t.accumulate(z1, gd);
                           t.accumulate(z0, -gd);
                         });
}

Var softmax_ce(Var logits, const std::vector<int>& labels, double weight) {
  const MatrixXd& z = logits.value();
  if (static_cast<Eigen::Index>(labels.size()) != z.rows()) throw std::invalid_argument("softmax_ce: label count");
  MatrixXd p(z.rows(), z.cols());
  double value = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double top = z.row(i).maxCoeff();
    Eigen::ArrayXd e = (z.row(i).array() - top).exp();
    const double s = e.sum();
    p.row(i) = (e / s).matrix().transpose();
    value += weight * (top + std::log(s) - z(i, labels[static_cast<std::size_t>(i)]));
  }
  return logits.tape->record(MatrixXd::Constant(1, 1, value), {logits},
                             [logits, p, labels, weight](Tape& t, const MatrixXd& g) {
                               MatrixXd gz = p;
                               for (std::size_t i = 0; i < labels.size(); ++i) {
                                 gz(static_cast<Eigen::Index>(i), labels[i]) -= 1.0;
                               }
                               t.accumulate(logits, (g(0, 0) * weight) * gz);
                             });
}

}  // namespace subdiff::ad
