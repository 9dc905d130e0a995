#ifndef ABSYNTH_GRAPH_HPP_
#define ABSYNTH_GRAPH_HPP_

// Minimal reverse-mode autodiff over dense column vectors and matrices.
// Parameters live outside the tape; ops that read them accumulate straight
// into Param::grad during backward().

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "absynth/error.hpp"

namespace absynth {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct Param {
  std::string name;
  Mat<Scalar> value;
  Mat<Scalar> grad;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Mat<Scalar>::Zero(rows, cols)), grad(Mat<Scalar>::Zero(rows, cols)) {}
};

using Var = int;

template <typename Scalar>
class Graph {
 public:
  using M = Mat<Scalar>;

  std::size_t size() const { return nodes_.size(); }
  const M& value(Var v) const { return nodes_[v].value; }
  Scalar scalar(Var v) const { return nodes_[v].value(0, 0); }
  const M& grad(Var v) const { return nodes_[v].grad; }

  Var constant(M value) { return push(Op::constant, std::move(value)); }
  Var zeros(Eigen::Index rows) { return constant(M::Zero(rows, 1)); }

  // Column `col` of a parameter matrix.
  Var lookup(Param<Scalar>& p, std::size_t col) {
    Var v = push(Op::lookup, p.value.col(col));
    nodes_[v].p1 = &p;
    nodes_[v].ints = {static_cast<int>(col)};
    return v;
  }

  // W x (+ b).
  Var affine(Param<Scalar>& w, Var x, Param<Scalar>* b = nullptr) {
    check_cols(w.value, value(x), "affine");
    M out = w.value * value(x);
    if (b) out += b->value;
    Var v = push(Op::affine, std::move(out));
    nodes_[v].p1 = &w;
    nodes_[v].p2 = b;
    nodes_[v].a = x;
    return v;
  }

  // Entry j is E[:, cols[j]] . q (+ bias[cols[j]]).
  Var gather_dot(Param<Scalar>& e, const std::vector<int>& cols, Var q, Param<Scalar>* bias = nullptr) {
    const M& qv = value(q);
    if (e.value.rows() != qv.rows()) throw Error(ErrorCode::shape_mismatch, "gather_dot");
    M out(static_cast<Eigen::Index>(cols.size()), 1);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(j, 0) = e.value.col(cols[j]).dot(qv.col(0));
      if (bias) out(j, 0) += bias->value(cols[j], 0);
    }
    Var v = push(Op::gather_dot, std::move(out));
    nodes_[v].p1 = &e;
    nodes_[v].p2 = bias;
    nodes_[v].a = q;
    nodes_[v].ints = cols;
    return v;
  }

  // Columns side by side.
  Var hcat(const std::vector<Var>& cols) {
    if (cols.empty()) throw Error(ErrorCode::shape_mismatch, "hcat of nothing");
    const Eigen::Index rows = value(cols[0]).rows();
    M out(rows, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (value(cols[j]).rows() != rows || value(cols[j]).cols() != 1) {
        throw Error(ErrorCode::shape_mismatch, "hcat");
      }
      out.col(j) = value(cols[j]);
    }
    Var v = push(Op::hcat, std::move(out));
    nodes_[v].args = cols;
    return v;
  }

  // Vertical concatenation.
  Var concat(const std::vector<Var>& parts) {
    Eigen::Index rows = 0;
    for (Var p : parts) rows += value(p).rows();
    M out(rows, 1);
    Eigen::Index at = 0;
    for (Var p : parts) {
      out.middleRows(at, value(p).rows()) = value(p);
      at += value(p).rows();
    }
    Var v = push(Op::concat, std::move(out));
    nodes_[v].args = parts;
    return v;
  }

  Var slice(Var x, Eigen::Index start, Eigen::Index len) {
    Var v = push(Op::slice, value(x).middleRows(start, len));
    nodes_[v].a = x;
    nodes_[v].ints = {static_cast<int>(start)};
    return v;
  }

  // Selected entries of a column vector, in order.
  Var rows(Var x, const std::vector<int>& idx) {
    M out(static_cast<Eigen::Index>(idx.size()), 1);
    for (std::size_t j = 0; j < idx.size(); ++j) out(j, 0) = value(x)(idx[j], 0);
    Var v = push(Op::rows, std::move(out));
    nodes_[v].a = x;
    nodes_[v].ints = idx;
    return v;
  }

  // m^T q  for a matrix m (d x n) and vector q (d).
  Var mat_t_vec(Var m, Var q) {
    if (value(m).rows() != value(q).rows()) throw Error(ErrorCode::shape_mismatch, "mat_t_vec");
    Var v = push(Op::mat_t_vec, value(m).transpose() * value(q));
    nodes_[v].a = m;
    nodes_[v].b = q;
    return v;
  }

  // m w  for m (d x n) and weights w (n).
  Var mat_vec(Var m, Var w) {
    if (value(m).cols() != value(w).rows()) throw Error(ErrorCode::shape_mismatch, "mat_vec");
    Var v = push(Op::mat_vec, value(m) * value(w));
    nodes_[v].a = m;
    nodes_[v].b = w;
    return v;
  }

  Var add(Var x, Var y) {
    if (value(x).rows() != value(y).rows()) throw Error(ErrorCode::shape_mismatch, "add");
    Var v = push(Op::add, value(x) + value(y));
    nodes_[v].a = x;
    nodes_[v].b = y;
    return v;
  }

  Var tanh(Var x) {
    Var v = push(Op::tanh, value(x).array().tanh().matrix());
    nodes_[v].a = x;
    return v;
  }

  // Elementwise product with a fixed mask (dropout).
  Var mask(Var x, M m) {
    Var v = push(Op::mask, value(x).cwiseProduct(m));
    nodes_[v].a = x;
    nodes_[v].aux = std::move(m);
    return v;
  }

  Var log_softmax(Var x) {
    const M& z = value(x);
    const Scalar mx = z.maxCoeff();
    const Scalar lse = mx + std::log((z.array() - mx).exp().sum());
    Var v = push(Op::log_softmax, (z.array() - lse).matrix());
    nodes_[v].a = x;
    return v;
  }

  Var softmax(Var x) {
    const M& z = value(x);
    M e = (z.array() - z.maxCoeff()).exp().matrix();
    e /= e.sum();
    Var v = push(Op::softmax, std::move(e));
    nodes_[v].a = x;
    return v;
  }

  Var pick(Var x, int i) {
    M out(1, 1);
    out(0, 0) = value(x)(i, 0);
    Var v = push(Op::pick, std::move(out));
    nodes_[v].a = x;
    nodes_[v].ints = {i};
    return v;
  }

  // log(sum(exp(x_k))) over scalars.
  Var logsumexp(const std::vector<Var>& xs) {
    if (xs.size() == 1) return xs[0];
    Scalar mx = -std::numeric_limits<Scalar>::infinity();
    for (Var x : xs) mx = std::max(mx, scalar(x));
    Scalar s = 0;
    for (Var x : xs) s += std::exp(scalar(x) - mx);
    M out(1, 1);
    out(0, 0) = mx + std::log(s);
    Var v = push(Op::logsumexp, std::move(out));
    nodes_[v].args = xs;
    return v;
  }

  // Sum of scalars times `coef`.
  Var sum(const std::vector<Var>& xs, Scalar coef = 1) {
    M out = M::Zero(1, 1);
    for (Var x : xs) out(0, 0) += scalar(x);
    out(0, 0) *= coef;
    Var v = push(Op::sum, std::move(out));
    nodes_[v].args = xs;
    nodes_[v].aux = M::Constant(1, 1, coef);
    return v;
  }

  // Fused LSTM cell. Output is [h'; c'] of size 2H; W is 4H x (in + H).
  Var lstm(Param<Scalar>& w, Param<Scalar>& b, Var x, Var h, Var c) {
    const Eigen::Index hd = value(h).rows();
    M xh(value(x).rows() + hd, 1);
    xh << value(x), value(h);
    check_cols(w.value, xh, "lstm");
    M z = w.value * xh + b.value;
    auto sig = [](const auto& a) { return (Scalar(1) + (-a).exp()).inverse().eval(); };
    M act(4 * hd, 1);
    act.middleRows(0, hd) = sig(z.middleRows(0, hd).array()).matrix();
    act.middleRows(hd, hd) = sig(z.middleRows(hd, hd).array()).matrix();
    act.middleRows(2 * hd, hd) = z.middleRows(2 * hd, hd).array().tanh().matrix();
    act.middleRows(3 * hd, hd) = sig(z.middleRows(3 * hd, hd).array()).matrix();
    M c_new = act.middleRows(hd, hd).cwiseProduct(value(c)) +
              act.middleRows(0, hd).cwiseProduct(act.middleRows(2 * hd, hd));
    M h_new = act.middleRows(3 * hd, hd).cwiseProduct(c_new.array().tanh().matrix());
    M out(2 * hd, 1);
    out << h_new, c_new;
    Var v = push(Op::lstm, std::move(out));
    Node& n = nodes_[v];
    n.p1 = &w;
    n.p2 = &b;
    n.args = {x, h, c};
    n.aux = std::move(act);
    n.aux2 = std::move(xh);
    return v;
  }

  // Seeds d(out)/d(out) = 1 for a scalar and propagates to every node and
  // parameter reachable from it.
  void backward(Var out) {
    for (auto& n : nodes_) n.grad = M::Zero(n.value.rows(), n.value.cols());
    nodes_[out].grad(0, 0) = 1;
    for (Var i = out; i >= 0; --i) propagate(i);
  }

 private:
  enum class Op {
    constant, lookup, affine, gather_dot, hcat, concat, slice, rows, mat_t_vec, mat_vec, add, tanh,
    mask, log_softmax, softmax, pick, logsumexp, sum, lstm
  };

  struct Node {
    Op op;
    M value;
    M grad;
    Var a = -1;
    Var b = -1;
    std::vector<Var> args;
    std::vector<int> ints;
    Param<Scalar>* p1 = nullptr;
    Param<Scalar>* p2 = nullptr;
    M aux;
    M aux2;
  };

  static void check_cols(const M& w, const M& x, const char* what) {
    if (w.cols() != x.rows()) {
      throw Error(ErrorCode::shape_mismatch, std::string(what) + ": " + std::to_string(w.rows()) + "x" +
                                                 std::to_string(w.cols()) + " times " +
                                                 std::to_string(x.rows()));
    }
  }

  Var push(Op op, M value) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size() - 1);
  }

  M& g(Var v) { return nodes_[v].grad; }

  void propagate(Var i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0 || n.grad.isZero(0)) return;
    const M& dy = n.grad;
    switch (n.op) {
      case Op::constant:
        break;
      case Op::lookup:
        n.p1->grad.col(n.ints[0]) += dy;
        break;
      case Op::affine:
        n.p1->grad.noalias() += dy * value(n.a).transpose();
        if (n.p2) n.p2->grad += dy;
        g(n.a).noalias() += n.p1->value.transpose() * dy;
        break;
      case Op::gather_dot: {
        const M& q = value(n.a);
        M& dq = g(n.a);
        for (std::size_t j = 0; j < n.ints.size(); ++j) {
          const Scalar d = dy(j, 0);
          if (d == 0) continue;
          dq += d * n.p1->value.col(n.ints[j]);
          n.p1->grad.col(n.ints[j]) += d * q;
          if (n.p2) n.p2->grad(n.ints[j], 0) += d;
        }
        break;
      }
      case Op::hcat:
        for (std::size_t j = 0; j < n.args.size(); ++j) g(n.args[j]) += dy.col(j);
        break;
      case Op::concat: {
        Eigen::Index at = 0;
        for (Var p : n.args) {
          const Eigen::Index r = value(p).rows();
          g(p) += dy.middleRows(at, r);
          at += r;
        }
        break;
      }
      case Op::slice:
        g(n.a).middleRows(n.ints[0], dy.rows()) += dy;
        break;
      case Op::rows:
        for (std::size_t j = 0; j < n.ints.size(); ++j) g(n.a)(n.ints[j], 0) += dy(j, 0);
        break;
      case Op::mat_t_vec:
        g(n.a).noalias() += value(n.b) * dy.transpose();
        g(n.b).noalias() += value(n.a) * dy;
        break;
      case Op::mat_vec:
        g(n.a).noalias() += dy * value(n.b).transpose();
        g(n.b).noalias() += value(n.a).transpose() * dy;
        break;
      case Op::add:
        g(n.a) += dy;
        g(n.b) += dy;
        break;
      case Op::tanh:
        g(n.a).array() += dy.array() * (Scalar(1) - n.value.array().square());
        break;
      case Op::mask:
        g(n.a).array() += dy.array() * n.aux.array();
        break;
      case Op::log_softmax: {
        const Scalar total = dy.sum();
        g(n.a).array() += dy.array() - n.value.array().exp() * total;
        break;
      }
      case Op::softmax: {
        const Scalar inner = dy.col(0).dot(n.value.col(0));
        g(n.a).array() += n.value.array() * (dy.array() - inner);
        break;
      }
      case Op::pick:
        g(n.a)(n.ints[0], 0) += dy(0, 0);
        break;
      case Op::logsumexp:
        for (Var x : n.args) g(x)(0, 0) += dy(0, 0) * std::exp(scalar(x) - n.value(0, 0));
        break;
      case Op::sum:
        for (Var x : n.args) g(x)(0, 0) += dy(0, 0) * n.aux(0, 0);
        break;
      case Op::lstm: {
        const Eigen::Index hd = n.value.rows() / 2;
        const M& act = n.aux;
        auto ig = act.middleRows(0, hd).array();
        auto fg = act.middleRows(hd, hd).array();
        auto gg = act.middleRows(2 * hd, hd).array();
        auto og = act.middleRows(3 * hd, hd).array();
        auto c_new = n.value.middleRows(hd, hd).array();
        const auto tc = c_new.tanh();
        auto dh = dy.middleRows(0, hd).array();
        M dc = dy.middleRows(hd, hd);
        dc.array() += dh * og * (Scalar(1) - tc.square());
        auto c_prev = value(n.args[2]).array();
        M dz(4 * hd, 1);
        dz.middleRows(0, hd).array() = dc.array() * gg * ig * (Scalar(1) - ig);
        dz.middleRows(hd, hd).array() = dc.array() * c_prev * fg * (Scalar(1) - fg);
        dz.middleRows(2 * hd, hd).array() = dc.array() * ig * (Scalar(1) - gg.square());
        dz.middleRows(3 * hd, hd).array() = dh * tc * og * (Scalar(1) - og);
        n.p1->grad.noalias() += dz * n.aux2.transpose();
        n.p2->grad += dz;
        M dxh = n.p1->value.transpose() * dz;
        const Eigen::Index xr = value(n.args[0]).rows();
        g(n.args[0]) += dxh.middleRows(0, xr);
        g(n.args[1]) += dxh.middleRows(xr, hd);
        g(n.args[2]).array() += dc.array() * fg;
        break;
      }
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace absynth

#endif  // ABSYNTH_GRAPH_HPP_
