#include "gamelab/tape.hpp"

#include <algorithm>
#include <cmath>

namespace gamelab {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) = -softplus(-x)
double stable_log_sigmoid(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace

const char* Tape::op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kNeg: return "neg";
    case Op::kScale: return "scale";
    case Op::kAddConst: return "add_const";
    case Op::kTanh: return "tanh";
    case Op::kRelu: return "relu";
    case Op::kLog: return "log";
    case Op::kExp: return "exp";
    case Op::kSquare: return "square";
    case Op::kSigmoid: return "sigmoid";
    case Op::kLogSigmoid: return "log_sigmoid";
    case Op::kClamp: return "clamp";
    case Op::kMatMul: return "matmul";
    case Op::kConcatRows: return "concat_rows";
    case Op::kSliceRows: return "slice_rows";
    case Op::kReshape: return "reshape";
    case Op::kTileCols: return "tile_cols";
    case Op::kAddColVec: return "add_colvec";
    case Op::kColSums: return "col_sums";
    case Op::kSum: return "sum";
    case Op::kMean: return "mean";
    case Op::kDot: return "dot";
  }
  return "?";
}

void Tape::reset() {
  nodes_.clear();
  val_.clear();
  adj_.clear();
}

void Tape::check_owned(Var v) const {
  if (v.tape != this || v.node < 0 || v.node >= static_cast<int>(nodes_.size()))
    throw PreconditionError("Var does not belong to this tape");
}

void Tape::check_same_shape(Var a, Var b, const char* op) const {
  if (rows(a) != rows(b) || cols(a) != cols(b))
    throw ConfigError(std::string(op) + ": shape mismatch");
}

std::span<double> Tape::vals(int node) {
  return {val_.data() + nodes_[node].off, static_cast<size_t>(nodes_[node].rows * nodes_[node].cols)};
}

std::span<const double> Tape::vals(int node) const {
  return {val_.data() + nodes_[node].off, static_cast<size_t>(nodes_[node].rows * nodes_[node].cols)};
}

std::span<double> Tape::adjs(int node) {
  return {adj_.data() + nodes_[node].off, static_cast<size_t>(nodes_[node].rows * nodes_[node].cols)};
}

Var Tape::push(Op op, int rows, int cols, int a, int b, double k, double k2) {
  Node n;
  n.op = op;
  n.rows = rows;
  n.cols = cols;
  n.a = a;
  n.b = b;
  n.k = k;
  n.k2 = k2;
  n.off = val_.size();
  size_t sz = static_cast<size_t>(rows) * static_cast<size_t>(cols);
  val_.resize(val_.size() + sz, 0.0);
  nodes_.push_back(n);
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(const Vec& v, int rows, int cols) {
  if (static_cast<int>(v.size()) != rows * cols) throw ConfigError("leaf: size != rows*cols");
  require_finite(v, "leaf");
  Var r = push(Op::kLeaf, rows, cols, -1, -1);
  std::copy(v.begin(), v.end(), vals(r.node).begin());
  return r;
}

#define GL_FINITE_CHECK(idx, opkind)                                        \
  do {                                                                      \
    for (double gl_x : vals(idx))                                           \
      if (!std::isfinite(gl_x))                                             \
        throw NumericError(std::string("non-finite result in primitive '") + \
                           op_name(opkind) + "'");                          \
  } while (0)

Var Tape::add(Var a, Var b) {
  check_owned(a); check_owned(b); check_same_shape(a, b, "add");
  Var r = push(Op::kAdd, rows(a), cols(a), a.node, b.node);
  auto y = vals(r.node); auto xa = vals(a.node); auto xb = vals(b.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = xa[i] + xb[i];
  GL_FINITE_CHECK(r.node, Op::kAdd);
  return r;
}

Var Tape::sub(Var a, Var b) {
  check_owned(a); check_owned(b); check_same_shape(a, b, "sub");
  Var r = push(Op::kSub, rows(a), cols(a), a.node, b.node);
  auto y = vals(r.node); auto xa = vals(a.node); auto xb = vals(b.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = xa[i] - xb[i];
  GL_FINITE_CHECK(r.node, Op::kSub);
  return r;
}

Var Tape::mul(Var a, Var b) {
  check_owned(a); check_owned(b); check_same_shape(a, b, "mul");
  Var r = push(Op::kMul, rows(a), cols(a), a.node, b.node);
  auto y = vals(r.node); auto xa = vals(a.node); auto xb = vals(b.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = xa[i] * xb[i];
  GL_FINITE_CHECK(r.node, Op::kMul);
  return r;
}

Var Tape::neg(Var a) {
  check_owned(a);
  Var r = push(Op::kNeg, rows(a), cols(a), a.node, -1);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = -xa[i];
  return r;
}

Var Tape::scale(Var a, double k) {
  check_owned(a);
  Var r = push(Op::kScale, rows(a), cols(a), a.node, -1, k);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = k * xa[i];
  GL_FINITE_CHECK(r.node, Op::kScale);
  return r;
}

Var Tape::add_const(Var a, double k) {
  check_owned(a);
  Var r = push(Op::kAddConst, rows(a), cols(a), a.node, -1, k);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = xa[i] + k;
  GL_FINITE_CHECK(r.node, Op::kAddConst);
  return r;
}

Var Tape::vtanh(Var a) {
  check_owned(a);
  Var r = push(Op::kTanh, rows(a), cols(a), a.node, -1);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(xa[i]);
  return r;
}

Var Tape::relu(Var a) {
  check_owned(a);
  Var r = push(Op::kRelu, rows(a), cols(a), a.node, -1);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = xa[i] > 0 ? xa[i] : 0.0;
  return r;
}

Var Tape::vlog(Var a) {
  check_owned(a);
  Var r = push(Op::kLog, rows(a), cols(a), a.node, -1);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = std::log(xa[i]);
  GL_FINITE_CHECK(r.node, Op::kLog);
  return r;
}

Var Tape::vexp(Var a) {
  check_owned(a);
  Var r = push(Op::kExp, rows(a), cols(a), a.node, -1);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = std::exp(xa[i]);
  GL_FINITE_CHECK(r.node, Op::kExp);
  return r;
}

Var Tape::square(Var a) {
  check_owned(a);
  Var r = push(Op::kSquare, rows(a), cols(a), a.node, -1);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = xa[i] * xa[i];
  GL_FINITE_CHECK(r.node, Op::kSquare);
  return r;
}

Var Tape::sigmoid(Var a) {
  check_owned(a);
  Var r = push(Op::kSigmoid, rows(a), cols(a), a.node, -1);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = stable_sigmoid(xa[i]);
  return r;
}

Var Tape::log_sigmoid(Var a) {
  check_owned(a);
  Var r = push(Op::kLogSigmoid, rows(a), cols(a), a.node, -1);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = stable_log_sigmoid(xa[i]);
  GL_FINITE_CHECK(r.node, Op::kLogSigmoid);
  return r;
}

Var Tape::clamp(Var a, double lo, double hi) {
  check_owned(a);
  Var r = push(Op::kClamp, rows(a), cols(a), a.node, -1, lo, hi);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (size_t i = 0; i < y.size(); ++i) y[i] = std::min(hi, std::max(lo, xa[i]));
  return r;
}

Var Tape::matmul(Var a, Var b) {
  check_owned(a); check_owned(b);
  int m = rows(a), n = cols(a), p = cols(b);
  if (rows(b) != n) throw ConfigError("matmul: inner dimensions disagree");
  Var r = push(Op::kMatMul, m, p, a.node, b.node);
  auto y = vals(r.node); auto xa = vals(a.node); auto xb = vals(b.node);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < p; ++j) {
      double s = 0;
      for (int k = 0; k < n; ++k) s += xa[i * n + k] * xb[k * p + j];
      y[i * p + j] = s;
    }
  }
  GL_FINITE_CHECK(r.node, Op::kMatMul);
  return r;
}

Var Tape::concat_rows(Var a, Var b) {
  check_owned(a); check_owned(b);
  if (cols(a) != cols(b)) throw ConfigError("concat_rows: column counts disagree");
  Var r = push(Op::kConcatRows, rows(a) + rows(b), cols(a), a.node, b.node);
  auto y = vals(r.node); auto xa = vals(a.node); auto xb = vals(b.node);
  std::copy(xa.begin(), xa.end(), y.begin());
  std::copy(xb.begin(), xb.end(), y.begin() + xa.size());
  return r;
}

Var Tape::slice_rows(Var a, int row0, int nrows) {
  check_owned(a);
  if (row0 < 0 || nrows < 1 || row0 + nrows > rows(a)) throw ConfigError("slice_rows: bad range");
  int p = cols(a);
  Var r = push(Op::kSliceRows, nrows, p, a.node, -1, row0);
  auto y = vals(r.node); auto xa = vals(a.node);
  std::copy(xa.begin() + static_cast<size_t>(row0) * p,
            xa.begin() + static_cast<size_t>(row0 + nrows) * p, y.begin());
  return r;
}

Var Tape::reshape(Var a, int rows, int cols) {
  check_owned(a);
  if (rows * cols != size(a)) throw ConfigError("reshape: element count changes");
  Var r = push(Op::kReshape, rows, cols, a.node, -1);
  auto y = vals(r.node); auto xa = vals(a.node);
  std::copy(xa.begin(), xa.end(), y.begin());
  return r;
}

Var Tape::tile_cols(Var a, int p) {
  check_owned(a);
  if (cols(a) != 1) throw ConfigError("tile_cols: input must be a column vector");
  if (p < 1) throw ConfigError("tile_cols: p must be >= 1");
  int m = rows(a);
  Var r = push(Op::kTileCols, m, p, a.node, -1, p);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) y[i * p + j] = xa[i];
  return r;
}

Var Tape::add_colvec(Var a, Var b) {
  check_owned(a); check_owned(b);
  if (cols(b) != 1 || rows(b) != rows(a)) throw ConfigError("add_colvec: bias shape mismatch");
  int m = rows(a), p = cols(a);
  Var r = push(Op::kAddColVec, m, p, a.node, b.node);
  auto y = vals(r.node); auto xa = vals(a.node); auto xb = vals(b.node);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) y[i * p + j] = xa[i * p + j] + xb[i];
  GL_FINITE_CHECK(r.node, Op::kAddColVec);
  return r;
}

Var Tape::col_sums(Var a) {
  check_owned(a);
  int m = rows(a), p = cols(a);
  Var r = push(Op::kColSums, 1, p, a.node, -1);
  auto y = vals(r.node); auto xa = vals(a.node);
  for (int j = 0; j < p; ++j) {
    double s = 0;
    for (int i = 0; i < m; ++i) s += xa[static_cast<size_t>(i) * p + j];
    y[j] = s;
  }
  GL_FINITE_CHECK(r.node, Op::kColSums);
  return r;
}

Var Tape::sum(Var a) {
  check_owned(a);
  Var r = push(Op::kSum, 1, 1, a.node, -1);
  double s = 0;
  for (double x : vals(a.node)) s += x;
  vals(r.node)[0] = s;
  GL_FINITE_CHECK(r.node, Op::kSum);
  return r;
}

Var Tape::mean(Var a) {
  check_owned(a);
  Var r = push(Op::kMean, 1, 1, a.node, -1);
  double s = 0;
  auto xa = vals(a.node);
  for (double x : xa) s += x;
  vals(r.node)[0] = s / static_cast<double>(xa.size());
  GL_FINITE_CHECK(r.node, Op::kMean);
  return r;
}

Var Tape::dot(Var a, Var b) {
  check_owned(a); check_owned(b); check_same_shape(a, b, "dot");
  Var r = push(Op::kDot, 1, 1, a.node, b.node);
  double s = 0;
  auto xa = vals(a.node); auto xb = vals(b.node);
  for (size_t i = 0; i < xa.size(); ++i) s += xa[i] * xb[i];
  vals(r.node)[0] = s;
  GL_FINITE_CHECK(r.node, Op::kDot);
  return r;
}

Vec Tape::value(Var v) const {
  check_owned(v);
  auto x = vals(v.node);
  return Vec(x.begin(), x.end());
}

double Tape::value_scalar(Var v) const {
  check_owned(v);
  if (size(v) != 1) throw PreconditionError("value_scalar: node is not 1x1");
  return vals(v.node)[0];
}

Vec Tape::adjoint(Var v) const {
  check_owned(v);
  if (adj_.size() != val_.size()) throw PreconditionError("adjoint: backward() has not run");
  const Node& n = nodes_[v.node];
  return Vec(adj_.begin() + n.off, adj_.begin() + n.off + static_cast<size_t>(n.rows) * n.cols);
}

void Tape::backward(Var y) {
  check_owned(y);
  if (size(y) != 1) throw PreconditionError("backward: output must be scalar");
  adj_.assign(val_.size(), 0.0);
  adjs(y.node)[0] = 1.0;

  for (int idx = y.node; idx >= 0; --idx) {
    const Node& n = nodes_[idx];
    auto g = adjs(idx);
    bool any = false;
    for (double v : g)
      if (v != 0) { any = true; break; }
    if (!any || n.op == Op::kLeaf) continue;

    auto da = n.a >= 0 ? adjs(n.a) : std::span<double>{};
    auto db = n.b >= 0 ? adjs(n.b) : std::span<double>{};
    auto xa = n.a >= 0 ? vals(n.a) : std::span<const double>{};
    auto xb = n.b >= 0 ? vals(n.b) : std::span<const double>{};
    auto yv = vals(idx);

    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kAdd:
        for (size_t i = 0; i < g.size(); ++i) { da[i] += g[i]; db[i] += g[i]; }
        break;
      case Op::kSub:
        for (size_t i = 0; i < g.size(); ++i) { da[i] += g[i]; db[i] -= g[i]; }
        break;
      case Op::kMul:
        for (size_t i = 0; i < g.size(); ++i) { da[i] += g[i] * xb[i]; db[i] += g[i] * xa[i]; }
        break;
      case Op::kNeg:
        for (size_t i = 0; i < g.size(); ++i) da[i] -= g[i];
        break;
      case Op::kScale:
        for (size_t i = 0; i < g.size(); ++i) da[i] += n.k * g[i];
        break;
      case Op::kAddConst:
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        break;
      case Op::kTanh:
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (1.0 - yv[i] * yv[i]);
        break;
      case Op::kRelu:
        for (size_t i = 0; i < g.size(); ++i) da[i] += xa[i] > 0 ? g[i] : 0.0;
        break;
      case Op::kLog:
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] / xa[i];
        break;
      case Op::kExp:
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * yv[i];
        break;
      case Op::kSquare:
        for (size_t i = 0; i < g.size(); ++i) da[i] += 2.0 * xa[i] * g[i];
        break;
      case Op::kSigmoid:
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * yv[i] * (1.0 - yv[i]);
        break;
      case Op::kLogSigmoid:
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * stable_sigmoid(-xa[i]);
        break;
      case Op::kClamp:
        for (size_t i = 0; i < g.size(); ++i)
          da[i] += (xa[i] >= n.k && xa[i] <= n.k2) ? g[i] : 0.0;
        break;
      case Op::kMatMul: {
        int m = nodes_[n.a].rows, nn = nodes_[n.a].cols, p = nodes_[n.b].cols;
        // dA += g * B^T ; dB += A^T * g
        for (int i = 0; i < m; ++i)
          for (int k = 0; k < nn; ++k) {
            double s = 0;
            for (int j = 0; j < p; ++j) s += g[i * p + j] * xb[k * p + j];
            da[i * nn + k] += s;
          }
        for (int k = 0; k < nn; ++k)
          for (int j = 0; j < p; ++j) {
            double s = 0;
            for (int i = 0; i < m; ++i) s += xa[i * nn + k] * g[i * p + j];
            db[k * p + j] += s;
          }
        break;
      }
      case Op::kConcatRows: {
        size_t na = xa.size();
        for (size_t i = 0; i < na; ++i) da[i] += g[i];
        for (size_t i = 0; i < xb.size(); ++i) db[i] += g[na + i];
        break;
      }
      case Op::kSliceRows: {
        size_t off = static_cast<size_t>(n.k) * n.cols;
        for (size_t i = 0; i < g.size(); ++i) da[off + i] += g[i];
        break;
      }
      case Op::kReshape:
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        break;
      case Op::kTileCols: {
        int m = n.rows, p = n.cols;
        for (int i = 0; i < m; ++i) {
          double s = 0;
          for (int j = 0; j < p; ++j) s += g[i * p + j];
          da[i] += s;
        }
        break;
      }
      case Op::kAddColVec: {
        int m = n.rows, p = n.cols;
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        for (int i = 0; i < m; ++i) {
          double s = 0;
          for (int j = 0; j < p; ++j) s += g[i * p + j];
          db[i] += s;
        }
        break;
      }
      case Op::kColSums: {
        int m = nodes_[n.a].rows, p = n.cols;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < p; ++j) da[static_cast<size_t>(i) * p + j] += g[j];
        break;
      }
      case Op::kSum:
        for (size_t i = 0; i < da.size(); ++i) da[i] += g[0];
        break;
      case Op::kMean: {
        double w = g[0] / static_cast<double>(da.size());
        for (size_t i = 0; i < da.size(); ++i) da[i] += w;
        break;
      }
      case Op::kDot:
        for (size_t i = 0; i < da.size(); ++i) { da[i] += g[0] * xb[i]; db[i] += g[0] * xa[i]; }
        break;
    }
  }
}

Vec grad(const ScalarFn& f, const Vec& x) {
  Tape tape;
  Var xv = tape.leaf(x);
  Var y = f(tape, xv);
  if (tape.size(y) != 1) throw PreconditionError("grad: f must return a scalar node");
  tape.backward(y);
  return tape.adjoint(xv);
}

Vec finite_diff(const ScalarFn& f, const Vec& x, double h) {
  if (!(h > 0)) throw PreconditionError("finite_diff: h must be > 0");
  Vec g(x.size());
  Vec xp = x;
  for (size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    double fp = eval_scalar(f, xp);
    xp[i] = x[i] - h;
    double fm = eval_scalar(f, xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double eval_scalar(const ScalarFn& f, const Vec& x) {
  Tape tape;
  Var xv = tape.leaf(x);
  Var y = f(tape, xv);
  return tape.value_scalar(y);
}

double max_rel_err(const Vec& a, const Vec& b, double floor) {
  double worst = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace gamelab
