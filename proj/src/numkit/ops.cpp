// Copyright 2026 The vilco Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vilco/numkit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "vilco/error.hpp"

namespace vilco::num {

namespace {

Graph& graph_of(Var a) { return *a.graph; }

void require_same_graph(Var a, Var b) {
  if (a.graph != b.graph) throw ShapeError("vars belong to different graphs");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_string(a.shape()));
  }
}

void accumulate(Graph& g, int id, const Tensor& delta) {
  if (!g.needs_grad(id)) return;
  auto& dst = g.grad(id).data();
  const auto& src = delta.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// c += a * b for row-major (n x k) * (k x m).
void gemm_acc(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
              std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = b + p * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c += a^T * b for a (k x n), b (k x m).
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
                 std::size_t m) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * n;
    const double* bp = b + p * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double api = ap[i];
      if (api == 0.0) continue;
      double* ci = c + i * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += api * bp[j];
    }
  }
}

// c += a * b^T for a (n x k), b (m x k).
void gemm_nt_acc(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
                 std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const double* bj = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      c[i * m + j] += s;
    }
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

}  // namespace

// ---------------------------------------------------------------------------

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor softmax(const Tensor& logits, std::size_t axis) {
  if (axis >= logits.rank()) throw ShapeError("softmax: axis out of range");
  logits.require_finite("softmax input");
  const auto& shape = logits.shape();
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t extent = shape[axis];
  const std::size_t outer = logits.size() / std::max<std::size_t>(1, extent * inner);
  Tensor out(shape);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      auto idx = [&](std::size_t k) { return (o * extent + k) * inner + in; };
      double mx = -INFINITY;
      for (std::size_t k = 0; k < extent; ++k) mx = std::max(mx, logits[idx(k)]);
      double total = 0.0;
      for (std::size_t k = 0; k < extent; ++k) {
        out[idx(k)] = std::exp(logits[idx(k)] - mx);
        total += out[idx(k)];
      }
      for (std::size_t k = 0; k < extent; ++k) out[idx(k)] /= total;
    }
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  Graph g;
  Var out = layer_norm(g.constant(x), g.constant(gain), g.constant(bias), eps);
  return out.value();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Tensor c(Shape{a.rows(), b.cols()});
  gemm_acc(a.data().data(), b.data().data(), c.data().data(), a.rows(), a.cols(), b.cols());
  return c;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  Tensor t(Shape{a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
  return t;
}

// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
  require_same_graph(a, b);
  Graph& g = graph_of(a);
  Tensor out = matmul(a.value(), b.value());
  const std::size_t n = a.value().rows(), k = a.value().cols(), m = b.value().cols();
  return g.push(std::move(out), {a, b}, [ia = a.id, ib = b.id, n, k, m](Graph& g, int self) {
    const Tensor& dy = g.grad(self);
    if (g.needs_grad(ia)) {
      gemm_nt_acc(dy.data().data(), g.value(ib).data().data(), g.grad(ia).data().data(), n, m, k);
    }
    if (g.needs_grad(ib)) {
      gemm_tn_acc(g.value(ia).data().data(), dy.data().data(), g.grad(ib).data().data(), k, n, m);
    }
  });
}

Var matmul_nt(Var a, Var b) {
  require_same_graph(a, b);
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "matmul_nt");
  require_matrix(bv, "matmul_nt");
  if (av.cols() != bv.cols()) throw ShapeError("matmul_nt: inner dimensions differ");
  const std::size_t n = av.rows(), k = av.cols(), m = bv.rows();
  Tensor out(Shape{n, m});
  gemm_nt_acc(av.data().data(), bv.data().data(), out.data().data(), n, k, m);
  return g.push(std::move(out), {a, b}, [ia = a.id, ib = b.id, n, k, m](Graph& g, int self) {
    const Tensor& dy = g.grad(self);  // n x m
    if (g.needs_grad(ia)) {
      gemm_acc(dy.data().data(), g.value(ib).data().data(), g.grad(ia).data().data(), n, m, k);
    }
    if (g.needs_grad(ib)) {
      gemm_tn_acc(dy.data().data(), g.value(ia).data().data(), g.grad(ib).data().data(), m, n, k);
    }
  });
}

Var transpose(Var a) {
  Graph& g = graph_of(a);
  return g.push(transpose(a.value()), {a}, [ia = a.id](Graph& g, int self) {
    accumulate(g, ia, transpose(g.grad(self)));
  });
}

Var add(Var a, Var b) {
  require_same_graph(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return graph_of(a).push(std::move(out), {a, b}, [ia = a.id, ib = b.id](Graph& g, int self) {
    accumulate(g, ia, g.grad(self));
    accumulate(g, ib, g.grad(self));
  });
}

Var sub(Var a, Var b) {
  require_same_graph(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return graph_of(a).push(std::move(out), {a, b}, [ia = a.id, ib = b.id](Graph& g, int self) {
    accumulate(g, ia, g.grad(self));
    if (g.needs_grad(ib)) {
      auto& d = g.grad(ib).data();
      const auto& s = g.grad(self).data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= s[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_graph(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return graph_of(a).push(std::move(out), {a, b}, [ia = a.id, ib = b.id](Graph& g, int self) {
    const Tensor& dy = g.grad(self);
    if (g.needs_grad(ia)) {
      auto& d = g.grad(ia);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * g.value(ib)[i];
    }
    if (g.needs_grad(ib)) {
      auto& d = g.grad(ib);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * g.value(ia)[i];
    }
  });
}

Var add_row(Var a, Var row) {
  require_same_graph(a, row);
  const Tensor& av = a.value();
  const Tensor& rv = row.value();
  if (rv.size() != av.cols()) throw ShapeError("add_row: bias length differs from columns");
  Tensor out = av;
  const std::size_t n = av.rows(), m = av.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += rv[j];
  return graph_of(a).push(std::move(out), {a, row},
                          [ia = a.id, ir = row.id, n, m](Graph& g, int self) {
                            const Tensor& dy = g.grad(self);
                            accumulate(g, ia, dy);
                            if (g.needs_grad(ir)) {
                              auto& d = g.grad(ir);
                              for (std::size_t i = 0; i < n; ++i)
                                for (std::size_t j = 0; j < m; ++j) d[j] += dy[i * m + j];
                            }
                          });
}

Var scale(Var a, double s) {
  Tensor out = a.value();
  for (auto& x : out.data()) x *= s;
  return graph_of(a).push(std::move(out), {a}, [ia = a.id, s](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    auto& d = g.grad(ia);
    const Tensor& dy = g.grad(self);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s * dy[i];
  });
}

Var add_scalar(Var a, double s) {
  Tensor out = a.value();
  for (auto& x : out.data()) x += s;
  return graph_of(a).push(std::move(out), {a}, [ia = a.id](Graph& g, int self) {
    accumulate(g, ia, g.grad(self));
  });
}

Var relu(Var a) {
  Tensor out = a.value();
  for (auto& x : out.data()) x = x > 0 ? x : 0.0;
  return graph_of(a).push(std::move(out), {a}, [ia = a.id](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    auto& d = g.grad(ia);
    const Tensor& dy = g.grad(self);
    const Tensor& x = g.value(ia);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (x[i] > 0) d[i] += dy[i];
  });
}

Var gelu(Var a) {
  Tensor out = a.value();
  for (auto& x : out.data()) {
    const double u = kGeluC * (x + 0.044715 * x * x * x);
    x = 0.5 * x * (1.0 + std::tanh(u));
  }
  return graph_of(a).push(std::move(out), {a}, [ia = a.id](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    auto& d = g.grad(ia);
    const Tensor& dy = g.grad(self);
    const Tensor& xv = g.value(ia);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double x = xv[i];
      const double u = kGeluC * (x + 0.044715 * x * x * x);
      const double t = std::tanh(u);
      const double du = kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
      d[i] += dy[i] * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du);
    }
  });
}

Var softplus(Var a) {
  Tensor out = a.value();
  for (auto& x : out.data()) x = softplus(x);
  return graph_of(a).push(std::move(out), {a}, [ia = a.id](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    auto& d = g.grad(ia);
    const Tensor& dy = g.grad(self);
    const Tensor& x = g.value(ia);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * sigmoid(x[i]);
  });
}

Var square(Var a) {
  Tensor out = a.value();
  for (auto& x : out.data()) x *= x;
  return graph_of(a).push(std::move(out), {a}, [ia = a.id](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    auto& d = g.grad(ia);
    const Tensor& dy = g.grad(self);
    const Tensor& x = g.value(ia);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += 2.0 * x[i] * dy[i];
  });
}

Var softmax_rows(Var a) {
  const Tensor& av = a.value();
  Tensor out = softmax(av, av.rank() - 1);
  const std::size_t n = av.rows(), m = av.cols();
  return graph_of(a).push(std::move(out), {a}, [ia = a.id, n, m](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    const Tensor& y = g.value(self);
    const Tensor& dy = g.grad(self);
    auto& d = g.grad(ia);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += dy[i * m + j] * y[i * m + j];
      for (std::size_t j = 0; j < m; ++j) d[i * m + j] += y[i * m + j] * (dy[i * m + j] - dot);
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  require_same_graph(x, gain);
  require_same_graph(x, bias);
  if (eps <= 0) throw ConfigError("layer_norm: eps must be positive");
  const Tensor& xv = x.value();
  const std::size_t m = xv.cols();
  if (m == 0) throw ShapeError("layer_norm: zero-length axis");
  if (gain.value().size() != m || bias.value().size() != m) {
    throw ShapeError("layer_norm: gain/bias length differs from last axis");
  }
  const std::size_t n = xv.rows();
  auto xhat = std::make_shared<Tensor>(xv.shape());
  auto inv_std = std::make_shared<std::vector<double>>(n);
  Tensor out(xv.shape());
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < m; ++j) mu += xv[i * m + j];
    mu /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t j = 0; j < m; ++j) var += (xv[i * m + j] - mu) * (xv[i * m + j] - mu);
    var /= static_cast<double>(m);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < m; ++j) {
      const double h = (xv[i * m + j] - mu) * is;
      (*xhat)[i * m + j] = h;
      out[i * m + j] = gv[j] * h + bv[j];
    }
  }
  return graph_of(x).push(
      std::move(out), {x, gain, bias},
      [ix = x.id, ig = gain.id, ib = bias.id, n, m, xhat, inv_std](Graph& g, int self) {
        const Tensor& dy = g.grad(self);
        const Tensor& gv = g.value(ig);
        if (g.needs_grad(ig) || g.needs_grad(ib)) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
              if (g.needs_grad(ig)) g.grad(ig)[j] += dy[i * m + j] * (*xhat)[i * m + j];
              if (g.needs_grad(ib)) g.grad(ib)[j] += dy[i * m + j];
            }
          }
        }
        if (!g.needs_grad(ix)) return;
        auto& dx = g.grad(ix);
        const double inv_m = 1.0 / static_cast<double>(m);
        for (std::size_t i = 0; i < n; ++i) {
          double mean_dh = 0.0, mean_dh_h = 0.0;
          for (std::size_t j = 0; j < m; ++j) {
            const double dh = dy[i * m + j] * gv[j];
            mean_dh += dh;
            mean_dh_h += dh * (*xhat)[i * m + j];
          }
          mean_dh *= inv_m;
          mean_dh_h *= inv_m;
          for (std::size_t j = 0; j < m; ++j) {
            const double dh = dy[i * m + j] * gv[j];
            dx[i * m + j] +=
                (*inv_std)[i] * (dh - mean_dh - (*xhat)[i * m + j] * mean_dh_h);
          }
        }
      });
}

Var l2_normalize_rows(Var a) {
  const Tensor& av = a.value();
  const std::size_t n = av.rows(), m = av.cols();
  auto norms = std::make_shared<std::vector<double>>(n);
  Tensor out = av;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += av[i * m + j] * av[i * m + j];
    const double nr = std::sqrt(s);
    if (nr == 0.0) {
      throw NumericalError("l2_normalize_rows: zero-norm row " + std::to_string(i));
    }
    (*norms)[i] = nr;
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] /= nr;
  }
  return graph_of(a).push(std::move(out), {a}, [ia = a.id, n, m, norms](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    const Tensor& y = g.value(self);
    const Tensor& dy = g.grad(self);
    auto& d = g.grad(ia);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += y[i * m + j] * dy[i * m + j];
      for (std::size_t j = 0; j < m; ++j)
        d[i * m + j] += (dy[i * m + j] - y[i * m + j] * dot) / (*norms)[i];
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t m = parts.front().value().cols();
  std::size_t n = 0;
  for (Var p : parts) {
    require_same_graph(parts.front(), p);
    if (p.value().cols() != m) throw ShapeError("concat_rows: column counts differ");
    n += p.value().rows();
  }
  Tensor out(Shape{n, m});
  std::vector<std::pair<int, std::size_t>> offsets;
  std::size_t at = 0;
  for (Var p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(), out.data().begin() + at * m);
    offsets.emplace_back(p.id, at);
    at += p.value().rows();
  }
  return graph_of(parts.front())
      .push(std::move(out), parts, [offsets = std::move(offsets), m](Graph& g, int self) {
        const Tensor& dy = g.grad(self);
        for (const auto& [id, row0] : offsets) {
          if (!g.needs_grad(id)) continue;
          auto& d = g.grad(id);
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[row0 * m + i];
        }
      });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  if (begin >= end || end > av.rows()) throw ShapeError("slice_rows: bad range");
  const std::size_t m = av.cols();
  Tensor out(Shape{end - begin, m},
             std::vector<double>(av.data().begin() + begin * m, av.data().begin() + end * m));
  return graph_of(a).push(std::move(out), {a}, [ia = a.id, begin, m](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    const Tensor& dy = g.grad(self);
    auto& d = g.grad(ia);
    for (std::size_t i = 0; i < dy.size(); ++i) d[begin * m + i] += dy[i];
  });
}

Var gather_rows(Var a, const std::vector<std::size_t>& rows) {
  const Tensor& av = a.value();
  const std::size_t m = av.cols();
  Tensor out(Shape{rows.size(), m});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= av.rows()) throw ShapeError("gather_rows: index out of range");
    std::copy_n(av.data().begin() + rows[r] * m, m, out.data().begin() + r * m);
  }
  return graph_of(a).push(std::move(out), {a}, [ia = a.id, rows, m](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    const Tensor& dy = g.grad(self);
    auto& d = g.grad(ia);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t j = 0; j < m; ++j) d[rows[r] * m + j] += dy[r * m + j];
  });
}

Var mean_rows(Var a) {
  const Tensor& av = a.value();
  const std::size_t n = av.rows(), m = av.cols();
  if (n == 0) throw ShapeError("mean_rows: no rows");
  Tensor out(Shape{1, m});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j] += av[i * m + j];
  for (auto& x : out.data()) x /= static_cast<double>(n);
  return graph_of(a).push(std::move(out), {a}, [ia = a.id, n, m](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    const Tensor& dy = g.grad(self);
    auto& d = g.grad(ia);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) d[i * m + j] += dy[j] * inv;
  });
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return graph_of(a).push(std::move(out), {a}, [ia = a.id](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    auto& d = g.grad(ia);
    const Tensor& dy = g.grad(self);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i];
  });
}

Var sum(Var a) {
  const auto& v = a.value().data();
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  return graph_of(a).push(Tensor::scalar(s), {a}, [ia = a.id](Graph& g, int self) {
    if (!g.needs_grad(ia)) return;
    const double dy = g.grad(self)[0];
    for (auto& x : g.grad(ia).data()) x += dy;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var scaled_dot_attention(Var q, Var k, Var v, std::size_t heads, Tensor* weights) {
  require_same_graph(q, k);
  require_same_graph(q, v);
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  require_matrix(qv, "attention");
  require_matrix(kv, "attention");
  require_matrix(vv, "attention");
  const std::size_t d = qv.cols();
  if (heads == 0 || d % heads != 0) throw ShapeError("attention: dim not divisible by heads");
  if (kv.cols() != d || vv.cols() != d) throw ShapeError("attention: model dims differ");
  if (kv.rows() != vv.rows()) throw ShapeError("attention: key/value lengths differ");
  const std::size_t tq = qv.rows(), tk = kv.rows(), dh = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  auto probs = std::make_shared<Tensor>(Shape{heads, tq, tk});
  Tensor out(Shape{tq, d});
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t c0 = h * dh;
    for (std::size_t i = 0; i < tq; ++i) {
      double* p = probs->data().data() + (h * tq + i) * tk;
      double mx = -INFINITY;
      for (std::size_t j = 0; j < tk; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < dh; ++c) s += qv[i * d + c0 + c] * kv[j * d + c0 + c];
        p[j] = s * inv_sqrt;
        mx = std::max(mx, p[j]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < tk; ++j) {
        p[j] = std::exp(p[j] - mx);
        total += p[j];
      }
      for (std::size_t j = 0; j < tk; ++j) {
        p[j] /= total;
        for (std::size_t c = 0; c < dh; ++c) out[i * d + c0 + c] += p[j] * vv[j * d + c0 + c];
      }
    }
  }
  if (weights != nullptr) *weights = *probs;
  return graph_of(q).push(
      std::move(out), {q, k, v},
      [iq = q.id, ik = k.id, iv = v.id, probs, heads, tq, tk, d, dh, inv_sqrt](Graph& g,
                                                                              int self) {
        const Tensor& dy = g.grad(self);
        const Tensor& qv = g.value(iq);
        const Tensor& kv = g.value(ik);
        const Tensor& vv = g.value(iv);
        const bool gq = g.needs_grad(iq), gk = g.needs_grad(ik), gv = g.needs_grad(iv);
        std::vector<double> dp(tk);
        for (std::size_t h = 0; h < heads; ++h) {
          const std::size_t c0 = h * dh;
          for (std::size_t i = 0; i < tq; ++i) {
            const double* p = probs->data().data() + (h * tq + i) * tk;
            double dot = 0.0;
            for (std::size_t j = 0; j < tk; ++j) {
              double s = 0.0;
              for (std::size_t c = 0; c < dh; ++c) s += dy[i * d + c0 + c] * vv[j * d + c0 + c];
              dp[j] = s;
              dot += s * p[j];
              if (gv) {
                auto& dv = g.grad(iv);
                for (std::size_t c = 0; c < dh; ++c) dv[j * d + c0 + c] += p[j] * dy[i * d + c0 + c];
              }
            }
            for (std::size_t j = 0; j < tk; ++j) {
              const double ds = p[j] * (dp[j] - dot) * inv_sqrt;
              if (ds == 0.0) continue;
              if (gq) {
                auto& dq = g.grad(iq);
                for (std::size_t c = 0; c < dh; ++c) dq[i * d + c0 + c] += ds * kv[j * d + c0 + c];
              }
              if (gk) {
                auto& dk = g.grad(ik);
                for (std::size_t c = 0; c < dh; ++c) dk[j * d + c0 + c] += ds * qv[i * d + c0 + c];
              }
            }
          }
        }
      });
}

Var conv1d(Var x, Var w, Var b, std::size_t stride) {
  require_same_graph(x, w);
  require_same_graph(x, b);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (wv.rank() != 3) throw ShapeError("conv1d: weight must be (kernel, cin, cout)");
  const std::size_t kernel = wv.dim(0), cin = wv.dim(1), cout = wv.dim(2);
  if (xv.cols() != cin) throw ShapeError("conv1d: input channels differ from weight");
  if (b.value().size() != cout) throw ShapeError("conv1d: bias length differs");
  if (stride == 0) throw ConfigError("conv1d: stride must be positive");
  const std::size_t t = xv.rows();
  const long pad = static_cast<long>((kernel - 1) / 2);
  const std::size_t tout = (t + 2 * pad - kernel) / stride + 1;
  Tensor out(Shape{tout, cout});
  const Tensor& bv = b.value();
  for (std::size_t o = 0; o < tout; ++o) {
    double* yo = out.data().data() + o * cout;
    for (std::size_t c = 0; c < cout; ++c) yo[c] = bv[c];
    for (std::size_t kk = 0; kk < kernel; ++kk) {
      const long src = static_cast<long>(o * stride + kk) - pad;
      if (src < 0 || src >= static_cast<long>(t)) continue;
      const double* xs = xv.data().data() + src * cin;
      const double* wk = wv.data().data() + kk * cin * cout;
      for (std::size_t i = 0; i < cin; ++i) {
        const double xi = xs[i];
        for (std::size_t c = 0; c < cout; ++c) yo[c] += xi * wk[i * cout + c];
      }
    }
  }
  return graph_of(x).push(
      std::move(out), {x, w, b},
      [ix = x.id, iw = w.id, ib = b.id, kernel, cin, cout, t, tout, pad, stride](Graph& g,
                                                                                int self) {
        const Tensor& dy = g.grad(self);
        const Tensor& xv = g.value(ix);
        const Tensor& wv = g.value(iw);
        const bool gx = g.needs_grad(ix), gw = g.needs_grad(iw);
        if (g.needs_grad(ib)) {
          auto& db = g.grad(ib);
          for (std::size_t o = 0; o < tout; ++o)
            for (std::size_t c = 0; c < cout; ++c) db[c] += dy[o * cout + c];
        }
        for (std::size_t o = 0; o < tout; ++o) {
          const double* dyo = dy.data().data() + o * cout;
          for (std::size_t kk = 0; kk < kernel; ++kk) {
            const long src = static_cast<long>(o * stride + kk) - pad;
            if (src < 0 || src >= static_cast<long>(t)) continue;
            for (std::size_t i = 0; i < cin; ++i) {
              const std::size_t wrow = (kk * cin + i) * cout;
              if (gx) {
                double s = 0.0;
                for (std::size_t c = 0; c < cout; ++c) s += dyo[c] * wv[wrow + c];
                g.grad(ix)[src * cin + i] += s;
              }
              if (gw) {
                const double xi = xv[src * cin + i];
                auto& dw = g.grad(iw);
                for (std::size_t c = 0; c < cout; ++c) dw[wrow + c] += xi * dyo[c];
              }
            }
          }
        }
      });
}

Var cross_entropy_rows(Var logits, const std::vector<std::size_t>& targets) {
  const Tensor& lv = logits.value();
  const std::size_t n = lv.rows(), m = lv.cols();
  if (targets.size() != n) throw ShapeError("cross_entropy_rows: one target per row");
  auto probs = std::make_shared<Tensor>(softmax(lv, lv.rank() - 1));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] >= m) throw ShapeError("cross_entropy_rows: target out of range");
    double mx = -INFINITY;
    for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, lv[i * m + j]);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += std::exp(lv[i * m + j] - mx);
    total += mx + std::log(s) - lv[i * m + targets[i]];
  }
  total /= static_cast<double>(n);
  return graph_of(logits).push(
      Tensor::scalar(total), {logits},
      [il = logits.id, probs, targets, n, m](Graph& g, int self) {
        if (!g.needs_grad(il)) return;
        const double dy = g.grad(self)[0] / static_cast<double>(n);
        auto& d = g.grad(il);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) d[i * m + j] += dy * (*probs)[i * m + j];
          d[i * m + targets[i]] -= dy;
        }
      });
}

Var sigmoid_focal_loss_sum(Var logits, const Tensor& targets, double alpha, double gamma) {
  const Tensor& lv = logits.value();
  require_same_shape(lv, targets, "sigmoid_focal_loss_sum");
  double total = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const double x = lv[i];
    const double p = sigmoid(x);
    if (targets[i] > 0.5) {
      total += alpha * std::pow(1.0 - p, gamma) * softplus(-x);
    } else {
      total += (1.0 - alpha) * std::pow(p, gamma) * softplus(x);
    }
  }
  return graph_of(logits).push(
      Tensor::scalar(total), {logits},
      [il = logits.id, targets, alpha, gamma](Graph& g, int self) {
        if (!g.needs_grad(il)) return;
        const double dy = g.grad(self)[0];
        const Tensor& lv = g.value(il);
        auto& d = g.grad(il);
        for (std::size_t i = 0; i < lv.size(); ++i) {
          const double x = lv[i];
          const double p = sigmoid(x);
          double dx;
          if (targets[i] > 0.5) {
            // d/dx [ -a (1-p)^g log p ]
            dx = alpha * (-gamma * p * std::pow(1.0 - p, gamma) * softplus(-x) -
                          std::pow(1.0 - p, gamma + 1.0));
          } else {
            // d/dx [ -(1-a) p^g log(1-p) ]
            dx = (1.0 - alpha) * (gamma * (1.0 - p) * std::pow(p, gamma) * softplus(x) +
                                  std::pow(p, gamma + 1.0));
          }
          d[i] += dy * dx;
        }
      });
}

Var iou_loss_sum(Var pred, const Tensor& target) {
  const Tensor& pv = pred.value();
  require_same_shape(pv, target, "iou_loss_sum");
  if (pv.cols() != 2) throw ShapeError("iou_loss_sum: expected (n x 2)");
  const std::size_t n = pv.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = pv[2 * i], r = pv[2 * i + 1];
    const double tl = target[2 * i], tr = target[2 * i + 1];
    const double inter = std::min(l, tl) + std::min(r, tr);
    const double uni = l + r + tl + tr - inter;
    total += 1.0 - inter / uni;
  }
  return graph_of(pred).push(
      Tensor::scalar(total), {pred}, [ip = pred.id, target, n](Graph& g, int self) {
        if (!g.needs_grad(ip)) return;
        const double dy = g.grad(self)[0];
        const Tensor& pv = g.value(ip);
        auto& d = g.grad(ip);
        for (std::size_t i = 0; i < n; ++i) {
          const double l = pv[2 * i], r = pv[2 * i + 1];
          const double tl = target[2 * i], tr = target[2 * i + 1];
          const double inter = std::min(l, tl) + std::min(r, tr);
          const double uni = l + r + tl + tr - inter;
          const double di_l = l < tl ? 1.0 : 0.0;
          const double di_r = r < tr ? 1.0 : 0.0;
          // L = 1 - I/U, dU = 1 - dI
          d[2 * i] += dy * -(di_l * uni - inter * (1.0 - di_l)) / (uni * uni);
          d[2 * i + 1] += dy * -(di_r * uni - inter * (1.0 - di_r)) / (uni * uni);
        }
      });
}

Var quadratic_penalty(Var theta, const Tensor& importance, const Tensor& anchor, double weight) {
  const Tensor& tv = theta.value();
  require_same_shape(tv, importance, "quadratic_penalty");
  require_same_shape(tv, anchor, "quadratic_penalty");
  double total = 0.0;
  for (std::size_t i = 0; i < tv.size(); ++i) {
    const double diff = tv[i] - anchor[i];
    total += importance[i] * diff * diff;
  }
  total *= 0.5 * weight;
  return graph_of(theta).push(
      Tensor::scalar(total), {theta},
      [it = theta.id, importance, anchor, weight](Graph& g, int self) {
        if (!g.needs_grad(it)) return;
        const double dy = g.grad(self)[0];
        const Tensor& tv = g.value(it);
        auto& d = g.grad(it);
        for (std::size_t i = 0; i < tv.size(); ++i)
          d[i] += dy * weight * importance[i] * (tv[i] - anchor[i]);
      });
}

}  // namespace vilco::num
