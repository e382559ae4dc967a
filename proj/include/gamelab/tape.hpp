#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gamelab/errors.hpp"
#include "gamelab/vec.hpp"

namespace gamelab {

class Tape;

// Handle to a tape node. Cheap to copy; valid for the lifetime of its tape.
struct Var {
  Tape* tape = nullptr;
  int node = -1;
  bool valid() const { return tape != nullptr && node >= 0; }
};

// Reverse-mode tape over a fixed primitive set (affine/matmul, tanh,
// rectifier, log, exp, square, logistic and reductions). Nodes hold dense
// row-major (rows x cols) values; every forward result is checked for
// finiteness and a NumericError names the offending primitive.
//
// A tape is single-owner: build a computation, call backward() on a scalar
// node once, read adjoints, then discard or reset().
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void reset();

  // Leaves. Constants and differentiable inputs are identical; adjoints are
  // available for every leaf after backward().
  Var leaf(const Vec& v, int rows, int cols);
  Var leaf(const Vec& v) { return leaf(v, static_cast<int>(v.size()), 1); }
  Var leaf(double x) { return leaf(Vec{x}, 1, 1); }

  // Elementwise (shapes must match).
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double k);
  Var add_const(Var a, double k);
  Var vtanh(Var a);
  Var relu(Var a);
  Var vlog(Var a);
  Var vexp(Var a);
  Var square(Var a);
  Var sigmoid(Var a);
  Var log_sigmoid(Var a);
  Var clamp(Var a, double lo, double hi);

  // Structure.
  Var matmul(Var a, Var b);                 // (m x n) * (n x p)
  Var concat_rows(Var a, Var b);            // stack along rows, equal cols
  Var slice_rows(Var a, int row0, int nrows);
  Var reshape(Var a, int rows, int cols);   // same element count, row-major
  Var tile_cols(Var a, int p);              // (m x 1) -> (m x p)
  Var add_colvec(Var a, Var b);             // (m x p) + broadcast (m x 1)

  Var col_sums(Var a);                      // (m x p) -> (1 x p)

  // Reductions to 1x1.
  Var sum(Var a);
  Var mean(Var a);
  Var dot(Var a, Var b);

  // Values / adjoints.
  int rows(Var v) const { return nodes_[v.node].rows; }
  int cols(Var v) const { return nodes_[v.node].cols; }
  int size(Var v) const { return nodes_[v.node].rows * nodes_[v.node].cols; }
  Vec value(Var v) const;
  double value_scalar(Var v) const;
  Vec adjoint(Var v) const;

  // Reverse sweep from a scalar node; seeds its adjoint with 1.
  void backward(Var y);

  size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op {
    kLeaf, kAdd, kSub, kMul, kNeg, kScale, kAddConst,
    kTanh, kRelu, kLog, kExp, kSquare, kSigmoid, kLogSigmoid, kClamp,
    kMatMul, kConcatRows, kSliceRows, kReshape, kTileCols, kAddColVec,
    kColSums, kSum, kMean, kDot,
  };

  struct Node {
    Op op;
    int rows, cols;
    int a = -1, b = -1;
    double k = 0, k2 = 0;
    size_t off = 0;  // offset into val_/adj_ arenas
  };

  Var push(Op op, int rows, int cols, int a, int b, double k = 0, double k2 = 0);
  void check_same_shape(Var a, Var b, const char* op) const;
  void check_owned(Var v) const;
  std::span<double> vals(int node);
  std::span<const double> vals(int node) const;
  std::span<double> adjs(int node);
  static const char* op_name(Op op);

  std::vector<Node> nodes_;
  std::vector<double> val_;
  std::vector<double> adj_;
};

// Free-function spellings for expression-style code.
inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator-(Var a) { return a.tape->neg(a); }
inline Var operator*(double k, Var a) { return a.tape->scale(a, k); }
inline Var tanh(Var a) { return a.tape->vtanh(a); }
inline Var relu(Var a) { return a.tape->relu(a); }
inline Var log(Var a) { return a.tape->vlog(a); }
inline Var exp(Var a) { return a.tape->vexp(a); }
inline Var square(Var a) { return a.tape->square(a); }
inline Var sigmoid(Var a) { return a.tape->sigmoid(a); }
inline Var log_sigmoid(Var a) { return a.tape->log_sigmoid(a); }
inline Var clamp(Var a, double lo, double hi) { return a.tape->clamp(a, lo, hi); }
inline Var matmul(Var a, Var b) { return a.tape->matmul(a, b); }
inline Var concat_rows(Var a, Var b) { return a.tape->concat_rows(a, b); }
inline Var slice_rows(Var a, int r0, int n) { return a.tape->slice_rows(a, r0, n); }
inline Var reshape(Var a, int rows, int cols) { return a.tape->reshape(a, rows, cols); }
inline Var tile_cols(Var a, int p) { return a.tape->tile_cols(a, p); }
inline Var add_colvec(Var a, Var b) { return a.tape->add_colvec(a, b); }
inline Var col_sums(Var a) { return a.tape->col_sums(a); }
inline Var sum(Var a) { return a.tape->sum(a); }
inline Var mean(Var a) { return a.tape->mean(a); }
inline Var dot(Var a, Var b) { return a.tape->dot(a, b); }

// A differentiable scalar function of one vector input.
using ScalarFn = std::function<Var(Tape&, Var)>;

// Exact reverse-mode gradient of f at x.
Vec grad(const ScalarFn& f, const Vec& x);

// Central-difference gradient estimate, component-wise (test oracle).
Vec finite_diff(const ScalarFn& f, const Vec& x, double h);

// Evaluate f at x without keeping the tape around.
double eval_scalar(const ScalarFn& f, const Vec& x);

// Largest relative disagreement between two gradients, with an absolute
// floor so near-zero components compare sanely.
double max_rel_err(const Vec& a, const Vec& b, double floor = 1e-6);

}  // namespace gamelab
