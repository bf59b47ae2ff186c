#include "anmvae/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "anmvae/errors.hpp"

namespace anmvae::ad {
namespace {

using Array = Eigen::Array<float, Eigen::Dynamic, 1>;
using ArrayMap = Eigen::Map<Array>;
using ConstArrayMap = Eigen::Map<const Array>;
using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstArrayMap as_array(const Tensor& t) {
  return ConstArrayMap(t.raw(), static_cast<Eigen::Index>(t.size()));
}
ArrayMap as_array(Tensor& t) { return ArrayMap(t.raw(), static_cast<Eigen::Index>(t.size())); }

ConstMatrixMap as_matrix(const Tensor& t) {
  return ConstMatrixMap(t.raw(), static_cast<Eigen::Index>(t.rows()),
                        static_cast<Eigen::Index>(t.cols()));
}
MatrixMap as_matrix(Tensor& t) {
  return MatrixMap(t.raw(), static_cast<Eigen::Index>(t.rows()),
                   static_cast<Eigen::Index>(t.cols()));
}

Graph& graph_of(Var a) {
  if (a.graph == nullptr) {
    throw ConfigError("operation on a detached Var");
  }
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  if (a.graph != b.graph || a.graph == nullptr) {
    throw ConfigError("operands belong to different graphs");
  }
  return *a.graph;
}

std::string shape_str(const Tensor& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.rank(); ++i) {
    s += (i ? "," : "") + std::to_string(t.shape()[i]);
  }
  return s + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ConfigError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                      shape_str(b));
  }
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.rank() != rank) {
    throw ConfigError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                      shape_str(a));
  }
}

/// Run `fn(slot)` on the gradient slot of `id` if that node needs a gradient.
template <class Fn>
void accum(Graph& g, std::size_t id, Fn&& fn) {
  if (g.requires_grad(id)) {
    fn(g.grad_slot(id));
  }
}

/// Elementwise unary op: forward `f(x)`, local derivative `df(x, y)`.
template <class F, class DF>
Var unary(Var a, F f, DF df) {
  Graph& g = graph_of(a);
  const Tensor& x = g.value(a);
  Tensor y(x.shape());
  as_array(y) = f(as_array(x));
  const std::size_t aid = a.id;
  const std::size_t yid = g.size();
  return g.record(std::move(y), {aid}, [aid, yid, df](Graph& g, const Tensor& gy) {
    accum(g, aid, [&](Tensor& slot) {
      as_array(slot) += as_array(gy) * df(as_array(g.value(aid)), as_array(g.value(yid)));
    });
  });
}

}  // namespace

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(g.value(a), g.value(b), "add");
  Tensor y(g.value(a).shape());
  as_array(y) = as_array(g.value(a)) + as_array(g.value(b));
  return g.record(std::move(y), {a.id, b.id}, [aid = a.id, bid = b.id](Graph& g, const Tensor& gy) {
    accum(g, aid, [&](Tensor& s) { as_array(s) += as_array(gy); });
    accum(g, bid, [&](Tensor& s) { as_array(s) += as_array(gy); });
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(g.value(a), g.value(b), "sub");
  Tensor y(g.value(a).shape());
  as_array(y) = as_array(g.value(a)) - as_array(g.value(b));
  return g.record(std::move(y), {a.id, b.id}, [aid = a.id, bid = b.id](Graph& g, const Tensor& gy) {
    accum(g, aid, [&](Tensor& s) { as_array(s) += as_array(gy); });
    accum(g, bid, [&](Tensor& s) { as_array(s) -= as_array(gy); });
  });
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(g.value(a), g.value(b), "mul");
  Tensor y(g.value(a).shape());
  as_array(y) = as_array(g.value(a)) * as_array(g.value(b));
  return g.record(std::move(y), {a.id, b.id}, [aid = a.id, bid = b.id](Graph& g, const Tensor& gy) {
    accum(g, aid, [&](Tensor& s) { as_array(s) += as_array(gy) * as_array(g.value(bid)); });
    accum(g, bid, [&](Tensor& s) { as_array(s) += as_array(gy) * as_array(g.value(aid)); });
  });
}

Var div(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(g.value(a), g.value(b), "div");
  Tensor y(g.value(a).shape());
  as_array(y) = as_array(g.value(a)) / as_array(g.value(b));
  return g.record(std::move(y), {a.id, b.id}, [aid = a.id, bid = b.id](Graph& g, const Tensor& gy) {
    const auto bv = as_array(g.value(bid));
    accum(g, aid, [&](Tensor& s) { as_array(s) += as_array(gy) / bv; });
    accum(g, bid, [&](Tensor& s) {
      as_array(s) -= as_array(gy) * as_array(g.value(aid)) / (bv * bv);
    });
  });
}

Var neg(Var a) {
  return unary(
      a, [](const auto& x) { return -x; },
      [](const auto& x, const auto&) { return Array::Constant(x.size(), -1.0f); });
}

Var exp(Var a) {
  return unary(
      a, [](const auto& x) { return x.exp(); }, [](const auto&, const auto& y) { return y; });
}

Var log(Var a) {
  return unary(
      a, [](const auto& x) { return x.log(); },
      [](const auto& x, const auto&) { return x.inverse(); });
}

Var sqrt(Var a) {
  return unary(
      a, [](const auto& x) { return x.sqrt(); },
      [](const auto&, const auto& y) { return 0.5f * y.inverse(); });
}

Var square(Var a) {
  return unary(
      a, [](const auto& x) { return x.square(); },
      [](const auto& x, const auto&) { return 2.0f * x; });
}

Var relu(Var a) {
  // subgradient at 0 is 0
  return unary(
      a, [](const auto& x) { return x.max(0.0f); },
      [](const auto& x, const auto&) { return (x > 0.0f).template cast<float>(); });
}

Var logistic(Var a) {
  return unary(
      a, [](const auto& x) { return ((-x).exp() + 1.0f).inverse(); },
      [](const auto&, const auto& y) { return y * (1.0f - y); });
}

Var clamp(Var a, float lo, float hi) {
  return unary(
      a, [lo, hi](const auto& x) { return x.max(lo).min(hi); },
      [lo, hi](const auto& x, const auto&) {
        return ((x >= lo) && (x <= hi)).template cast<float>();
      });
}

Var scale(Var a, double factor) {
  const float f = static_cast<float>(factor);
  return unary(
      a, [f](const auto& x) { return x * f; },
      [f](const auto& x, const auto&) { return Array::Constant(x.size(), f); });
}

Var add_scalar(Var a, double offset) {
  const float c = static_cast<float>(offset);
  return unary(
      a, [c](const auto& x) { return x + c; },
      [](const auto& x, const auto&) { return Array::Ones(x.size()); });
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = g.value(a);
  const double acc = as_array(x).cast<double>().sum();
  return g.record(Tensor::scalar(static_cast<float>(acc)), {a.id},
                  [aid = a.id](Graph& g, const Tensor& gy) {
                    accum(g, aid, [&](Tensor& s) { as_array(s) += gy[0]; });
                  });
}

Var mean(Var a) {
  const std::size_t n = graph_of(a).value(a).size();
  if (n == 0) {
    throw ConfigError("mean of an empty tensor");
  }
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var sum_rows(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = g.value(a);
  require_rank(x, 2, "sum_rows");
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor y({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      acc += x.at(r, c);
    }
    y[r] = static_cast<float>(acc);
  }
  return g.record(std::move(y), {a.id}, [aid = a.id, cols](Graph& g, const Tensor& gy) {
    accum(g, aid, [&](Tensor& s) {
      for (std::size_t r = 0; r < gy.size(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          s.at(r, c) += gy[r];
        }
      }
    });
  });
}

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  require_rank(av, 2, "matmul");
  require_rank(bv, 2, "matmul");
  if (av.cols() != bv.rows()) {
    throw ConfigError("matmul: inner dimensions differ " + shape_str(av) + " x " + shape_str(bv));
  }
  Tensor y({av.rows(), bv.cols()});
  as_matrix(y).noalias() = as_matrix(av) * as_matrix(bv);
  return g.record(std::move(y), {a.id, b.id}, [aid = a.id, bid = b.id](Graph& g, const Tensor& gy) {
    accum(g, aid, [&](Tensor& s) {
      as_matrix(s).noalias() += as_matrix(gy) * as_matrix(g.value(bid)).transpose();
    });
    accum(g, bid, [&](Tensor& s) {
      as_matrix(s).noalias() += as_matrix(g.value(aid)).transpose() * as_matrix(gy);
    });
  });
}

Var matvec(Var a, Var x) {
  Graph& g = graph_of(a, x);
  const Tensor& av = g.value(a);
  const Tensor& xv = g.value(x);
  require_rank(av, 2, "matvec");
  require_rank(xv, 1, "matvec");
  if (av.cols() != xv.size()) {
    throw ConfigError("matvec: dimension mismatch " + shape_str(av) + " x " + shape_str(xv));
  }
  Tensor y({av.rows()});
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < av.cols(); ++c) {
      acc += static_cast<double>(av.at(r, c)) * xv[c];
    }
    y[r] = static_cast<float>(acc);
  }
  return g.record(std::move(y), {a.id, x.id}, [aid = a.id, xid = x.id](Graph& g, const Tensor& gy) {
    const Tensor& av = g.value(aid);
    const Tensor& xv = g.value(xid);
    accum(g, aid, [&](Tensor& s) {
      for (std::size_t r = 0; r < av.rows(); ++r) {
        for (std::size_t c = 0; c < av.cols(); ++c) {
          s.at(r, c) += gy[r] * xv[c];
        }
      }
    });
    accum(g, xid, [&](Tensor& s) {
      for (std::size_t c = 0; c < av.cols(); ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < av.rows(); ++r) {
          acc += static_cast<double>(av.at(r, c)) * gy[r];
        }
        s[c] += static_cast<float>(acc);
      }
    });
  });
}

Var add_rowvec(Var a, Var row) {
  Graph& g = graph_of(a, row);
  const Tensor& av = g.value(a);
  const Tensor& rv = g.value(row);
  require_rank(av, 2, "add_rowvec");
  if (rv.size() != av.cols()) {
    throw ConfigError("add_rowvec: row length " + std::to_string(rv.size()) + " vs " +
                      std::to_string(av.cols()) + " columns");
  }
  Tensor y = av;
  as_matrix(y).rowwise() += as_array(rv).matrix().transpose();
  return g.record(std::move(y), {a.id, row.id},
                  [aid = a.id, rid = row.id](Graph& g, const Tensor& gy) {
                    accum(g, aid, [&](Tensor& s) { as_array(s) += as_array(gy); });
                    accum(g, rid, [&](Tensor& s) {
                      as_array(s) += as_matrix(gy).colwise().sum().transpose().array();
                    });
                  });
}

Var linear(Var x, Var w, Var b) {
  Graph& g = graph_of(x, w);
  graph_of(x, b);
  const Tensor& xv = g.value(x);
  const Tensor& wv = g.value(w);
  const Tensor& bv = g.value(b);
  require_rank(xv, 2, "linear");
  require_rank(wv, 2, "linear");
  if (xv.cols() != wv.rows() || bv.size() != wv.cols()) {
    throw ConfigError("linear: shapes " + shape_str(xv) + " x " + shape_str(wv) + " + " +
                      shape_str(bv) + " do not fit");
  }
  Tensor y({xv.rows(), wv.cols()});
  auto ym = as_matrix(y);
  ym.noalias() = as_matrix(xv) * as_matrix(wv);
  ym.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(bv.raw(), static_cast<Eigen::Index>(bv.size()));
  return g.record(std::move(y), {x.id, w.id, b.id},
                  [xid = x.id, wid = w.id, bid = b.id](Graph& g, const Tensor& gy) {
                    accum(g, xid, [&](Tensor& s) {
                      as_matrix(s).noalias() += as_matrix(gy) * as_matrix(g.value(wid)).transpose();
                    });
                    accum(g, wid, [&](Tensor& s) {
                      as_matrix(s).noalias() += as_matrix(g.value(xid)).transpose() * as_matrix(gy);
                    });
                    accum(g, bid, [&](Tensor& s) {
                      Eigen::Map<Eigen::RowVectorXf>(s.raw(), static_cast<Eigen::Index>(s.size())) +=
                          as_matrix(gy).colwise().sum();
                    });
                  });
}

Var squared_error(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  require_same_shape(av, bv, "squared_error");
  // float blocks, double across blocks
  double acc = 0.0;
  constexpr std::size_t kBlock = 256;
  for (std::size_t i = 0; i < av.size(); i += kBlock) {
    const auto n = static_cast<Eigen::Index>(std::min(kBlock, av.size() - i));
    acc += (ConstArrayMap(av.raw() + i, n) - ConstArrayMap(bv.raw() + i, n)).square().sum();
  }
  return g.record(Tensor::scalar(static_cast<float>(acc)), {a.id, b.id},
                  [aid = a.id, bid = b.id](Graph& g, const Tensor& gy) {
                    const float k = 2.0f * gy[0];
                    auto diff = as_array(g.value(aid)) - as_array(g.value(bid));
                    accum(g, aid, [&](Tensor& s) { as_array(s) += k * diff; });
                    accum(g, bid, [&](Tensor& s) { as_array(s) -= k * diff; });
                  });
}

Var column(Var a, std::size_t j) {
  Graph& g = graph_of(a);
  const Tensor& av = g.value(a);
  require_rank(av, 2, "column");
  if (j >= av.cols()) {
    throw ConfigError("column index out of range");
  }
  const std::size_t rows = av.rows();
  Tensor y({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = av.at(r, j);
  }
  return g.record(std::move(y), {a.id}, [aid = a.id, j](Graph& g, const Tensor& gy) {
    accum(g, aid, [&](Tensor& s) {
      for (std::size_t r = 0; r < gy.size(); ++r) {
        s.at(r, j) += gy[r];
      }
    });
  });
}

Var stack_columns(std::span<const Var> columns) {
  if (columns.empty()) {
    throw ConfigError("stack_columns needs at least one column");
  }
  Graph& g = graph_of(columns[0]);
  const std::size_t rows = g.value(columns[0]).size();
  const std::size_t k = columns.size();
  Tensor y({rows, k});
  std::vector<std::size_t> ids;
  for (std::size_t c = 0; c < k; ++c) {
    graph_of(columns[0], columns[c]);
    const Tensor& v = g.value(columns[c]);
    require_rank(v, 1, "stack_columns");
    if (v.size() != rows) {
      throw ConfigError("stack_columns: column lengths differ");
    }
    for (std::size_t r = 0; r < rows; ++r) {
      y.at(r, c) = v[r];
    }
    ids.push_back(columns[c].id);
  }
  return g.record(std::move(y), ids, [ids](Graph& g, const Tensor& gy) {
    for (std::size_t c = 0; c < ids.size(); ++c) {
      accum(g, ids[c], [&](Tensor& s) {
        for (std::size_t r = 0; r < s.size(); ++r) {
          s[r] += gy.at(r, c);
        }
      });
    }
  });
}

Var gather(Var a, std::span<const std::size_t> indices) {
  Graph& g = graph_of(a);
  const Tensor& av = g.value(a);
  Tensor y({indices.size()});
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= av.size()) {
      throw ConfigError("gather index out of range");
    }
    y[i] = av[idx[i]];
  }
  return g.record(std::move(y), {a.id}, [aid = a.id, idx = std::move(idx)](Graph& g, const Tensor& gy) {
    accum(g, aid, [&](Tensor& s) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        s[idx[i]] += gy[i];
      }
    });
  });
}

Var reshape(Var a, std::vector<std::size_t> shape) {
  Graph& g = graph_of(a);
  const Tensor& av = g.value(a);
  if (shape_size(shape) != av.size()) {
    throw ConfigError("reshape: element count changes");
  }
  std::vector<float> data(av.data().begin(), av.data().end());
  return g.record(Tensor(std::move(shape), std::move(data)), {a.id},
                  [aid = a.id](Graph& g, const Tensor& gy) {
                    accum(g, aid, [&](Tensor& s) { as_array(s) += as_array(gy); });
                  });
}

namespace {

/// Stable logsumexp of one contiguous row; fills `weights` with the softmax.
double row_logsumexp(const float* v, std::size_t n, double* weights) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    m = std::max(m, static_cast<double>(v[i]));
  }
  if (!std::isfinite(m)) {
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] = 1.0 / static_cast<double>(n);
    }
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = std::exp(static_cast<double>(v[i]) - m);
    acc += weights[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] /= acc;
  }
  return m + std::log(acc);
}

}  // namespace

Var logsumexp(Var v) {
  Graph& g = graph_of(v);
  const Tensor& x = g.value(v);
  if (x.size() == 0) {
    throw ConfigError("logsumexp of an empty vector");
  }
  std::vector<double> w(x.size());
  const double out = row_logsumexp(x.raw(), x.size(), w.data());
  return g.record(Tensor::scalar(static_cast<float>(out)), {v.id},
                  [vid = v.id, w = std::move(w)](Graph& g, const Tensor& gy) {
                    accum(g, vid, [&](Tensor& s) {
                      for (std::size_t i = 0; i < w.size(); ++i) {
                        s[i] += static_cast<float>(gy[0] * w[i]);
                      }
                    });
                  });
}

Var logsumexp_rows(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = g.value(a);
  require_rank(x, 2, "logsumexp_rows");
  const std::size_t rows = x.rows(), cols = x.cols();
  if (cols == 0) {
    throw ConfigError("logsumexp_rows over zero columns");
  }
  std::vector<double> w(rows * cols);
  Tensor y({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = static_cast<float>(row_logsumexp(x.raw() + r * cols, cols, w.data() + r * cols));
  }
  return g.record(std::move(y), {a.id}, [aid = a.id, cols, w = std::move(w)](Graph& g, const Tensor& gy) {
    accum(g, aid, [&](Tensor& s) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        s[i] += static_cast<float>(gy[i / cols] * w[i]);
      }
    });
  });
}

namespace {

struct Inverse2 {
  double a, b, c, d;  // row-major inverse entries
  double det;
};

Inverse2 checked_inverse(const Tensor& m, const char* op) {
  if (m.size() != 4) {
    throw ConfigError(std::string(op) + ": expected a 2x2 matrix, got " + shape_str(m));
  }
  const double a = m[0], b = m[1], c = m[2], d = m[3];
  const double det = a * d - b * c;
  if (!(det > kMinDeterminant) || !(a > 0.0) || !(d > 0.0)) {
    throw NumericalDomainError(std::string(op) + ": matrix is not SPD (det = " +
                                   std::to_string(det) + ")",
                               det);
  }
  return {d / det, -b / det, -c / det, a / det, det};
}

}  // namespace

Var logdet2x2(Var a) {
  Graph& g = graph_of(a);
  const Inverse2 inv = checked_inverse(g.value(a), "logdet2x2");
  return g.record(Tensor::scalar(static_cast<float>(std::log(inv.det))), {a.id},
                  [aid = a.id, inv](Graph& g, const Tensor& gy) {
                    // d ln det A / dA = A^{-T}
                    accum(g, aid, [&](Tensor& s) {
                      s[0] += static_cast<float>(gy[0] * inv.a);
                      s[1] += static_cast<float>(gy[0] * inv.c);
                      s[2] += static_cast<float>(gy[0] * inv.b);
                      s[3] += static_cast<float>(gy[0] * inv.d);
                    });
                  });
}

Var inverse2x2(Var a) {
  Graph& g = graph_of(a);
  const Tensor& m = g.value(a);
  const Inverse2 inv = checked_inverse(m, "inverse2x2");
  Tensor y(m.shape());
  y[0] = static_cast<float>(inv.a);
  y[1] = static_cast<float>(inv.b);
  y[2] = static_cast<float>(inv.c);
  y[3] = static_cast<float>(inv.d);
  return g.record(std::move(y), {a.id}, [aid = a.id, inv](Graph& g, const Tensor& gy) {
    // dA = -B^T G B^T with B = A^{-1}
    accum(g, aid, [&](Tensor& s) {
      const double bt[4] = {inv.a, inv.c, inv.b, inv.d};
      double tmp[4];
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          tmp[r * 2 + c] = bt[r * 2] * gy[c] + bt[r * 2 + 1] * gy[2 + c];
        }
      }
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          s[r * 2 + c] -= static_cast<float>(tmp[r * 2] * bt[c] + tmp[r * 2 + 1] * bt[2 + c]);
        }
      }
    });
  });
}

}  // namespace anmvae::ad
