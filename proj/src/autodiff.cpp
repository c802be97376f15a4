/*
 * Copyright 2026 The apesed Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "apesed/autodiff.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "apesed/kernels.hpp"

namespace apesed::ad {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void add_into(Matrix& dst, const Matrix& src) {
  for (size_t i = 0; i < src.data.size(); ++i) dst.data[i] += src.data[i];
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var Tape::variable(Matrix value) { return push(std::move(value), true, nullptr); }

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::push(Matrix value, bool needs_grad, Backward backward) {
  nodes_.push_back(Node{std::move(value), Matrix{}, needs_grad, needs_grad ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

Matrix& Tape::grad_buffer(size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows, n.value.cols);
  return n.grad;
}

void Tape::backward(Var output, double seed) {
  require(output.tape() == this, "backward: foreign variable");
  require(output.value().size() == 1, "backward: output must be 1x1");
  if (!nodes_[output.id()].needs_grad) return;
  grad_buffer(output.id()).data[0] += seed;
  for (size_t i = output.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, i);
  }
}

Var matmul(Var a, Var b) {
  Tape& t = *a.tape();
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  require(av.cols == bv.rows, "matmul: inner dimensions differ");
  Matrix c(av.rows, bv.cols);
  kernels::gemm_nn(av.rows, bv.cols, av.cols, av.data, bv.data, c.data);
  const size_t ia = a.id(), ib = b.id();
  return t.push(std::move(c), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    const Matrix& A = tp.value_of(ia);
    const Matrix& B = tp.value_of(ib);
    if (tp.needs_grad(Var(&tp, ia)))
      kernels::gemm_nt(A.rows, A.cols, B.cols, dc.data, B.data, tp.grad_buffer(ia).data);
    if (tp.needs_grad(Var(&tp, ib)))
      kernels::gemm_tn(A.rows, B.cols, A.cols, A.data, dc.data, tp.grad_buffer(ib).data);
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = *a.tape();
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  require(av.cols == bv.cols, "matmul_nt: inner dimensions differ");
  Matrix c(av.rows, bv.rows);
  kernels::gemm_nt(av.rows, bv.rows, av.cols, av.data, bv.data, c.data);
  const size_t ia = a.id(), ib = b.id();
  return t.push(std::move(c), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    const Matrix& A = tp.value_of(ia);
    const Matrix& B = tp.value_of(ib);
    if (tp.needs_grad(Var(&tp, ia)))
      kernels::gemm_nn(A.rows, A.cols, B.rows, dc.data, B.data, tp.grad_buffer(ia).data);
    if (tp.needs_grad(Var(&tp, ib)))
      kernels::gemm_tn(A.rows, A.cols, B.rows, dc.data, A.data, tp.grad_buffer(ib).data);
  });
}

Var add(Var a, Var b) {
  Tape& t = *a.tape();
  require(a.value().same_shape(b.value()), "add: shape mismatch");
  Matrix c = a.value();
  add_into(c, b.value());
  const size_t ia = a.id(), ib = b.id();
  return t.push(std::move(c), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    if (tp.needs_grad(Var(&tp, ia))) add_into(tp.grad_buffer(ia), dc);
    if (tp.needs_grad(Var(&tp, ib))) add_into(tp.grad_buffer(ib), dc);
  });
}

Var add_row(Var a, Var row) {
  Tape& t = *a.tape();
  const Matrix& rv = row.value();
  require(rv.rows == 1 && rv.cols == a.cols(), "add_row: bias shape mismatch");
  Matrix c = a.value();
  for (size_t r = 0; r < c.rows; ++r) {
    auto dst = c.row(r);
    for (size_t j = 0; j < c.cols; ++j) dst[j] += rv.data[j];
  }
  const size_t ia = a.id(), ib = row.id();
  return t.push(std::move(c), t.needs_grad(a) || t.needs_grad(row), [ia, ib](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    if (tp.needs_grad(Var(&tp, ia))) add_into(tp.grad_buffer(ia), dc);
    if (tp.needs_grad(Var(&tp, ib))) {
      Matrix& db = tp.grad_buffer(ib);
      for (size_t r = 0; r < dc.rows; ++r) {
        const auto src = dc.row(r);
        for (size_t j = 0; j < dc.cols; ++j) db.data[j] += src[j];
      }
    }
  });
}

Var mul(Var a, Var b) {
  Tape& t = *a.tape();
  require(a.value().same_shape(b.value()), "mul: shape mismatch");
  Matrix c = a.value();
  const Matrix& bv = b.value();
  for (size_t i = 0; i < c.data.size(); ++i) c.data[i] *= bv.data[i];
  const size_t ia = a.id(), ib = b.id();
  return t.push(std::move(c), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    if (tp.needs_grad(Var(&tp, ia))) {
      Matrix& da = tp.grad_buffer(ia);
      const Matrix& B = tp.value_of(ib);
      for (size_t i = 0; i < dc.data.size(); ++i) da.data[i] += dc.data[i] * B.data[i];
    }
    if (tp.needs_grad(Var(&tp, ib))) {
      Matrix& db = tp.grad_buffer(ib);
      const Matrix& A = tp.value_of(ia);
      for (size_t i = 0; i < dc.data.size(); ++i) db.data[i] += dc.data[i] * A.data[i];
    }
  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape();
  Matrix c = a.value();
  for (auto& v : c.data) v *= s;
  const size_t ia = a.id();
  return t.push(std::move(c), t.needs_grad(a), [ia, s](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    Matrix& da = tp.grad_buffer(ia);
    for (size_t i = 0; i < dc.data.size(); ++i) da.data[i] += s * dc.data[i];
  });
}

Var mask(Var a, const Matrix& m) {
  Tape& t = *a.tape();
  require(a.value().same_shape(m), "mask: shape mismatch");
  Matrix c = a.value();
  for (size_t i = 0; i < c.data.size(); ++i) c.data[i] *= m.data[i];
  const size_t ia = a.id();
  return t.push(std::move(c), t.needs_grad(a), [ia, m](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    Matrix& da = tp.grad_buffer(ia);
    for (size_t i = 0; i < dc.data.size(); ++i) da.data[i] += m.data[i] * dc.data[i];
  });
}

Var sigmoid(Var a) {
  Tape& t = *a.tape();
  Matrix c = a.value();
  for (auto& v : c.data) v = sigmoid_scalar(v);
  const size_t ia = a.id();
  return t.push(std::move(c), t.needs_grad(a), [ia](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    const Matrix& y = tp.value_of(self);
    Matrix& da = tp.grad_buffer(ia);
    for (size_t i = 0; i < dc.data.size(); ++i) da.data[i] += dc.data[i] * y.data[i] * (1.0 - y.data[i]);
  });
}

Var tanh(Var a) {
  Tape& t = *a.tape();
  Matrix c = a.value();
  for (auto& v : c.data) v = std::tanh(v);
  const size_t ia = a.id();
  return t.push(std::move(c), t.needs_grad(a), [ia](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    const Matrix& y = tp.value_of(self);
    Matrix& da = tp.grad_buffer(ia);
    for (size_t i = 0; i < dc.data.size(); ++i) da.data[i] += dc.data[i] * (1.0 - y.data[i] * y.data[i]);
  });
}

Var relu(Var a) {
  Tape& t = *a.tape();
  Matrix c = a.value();
  for (auto& v : c.data) v = v > 0.0 ? v : 0.0;
  const size_t ia = a.id();
  return t.push(std::move(c), t.needs_grad(a), [ia](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    const Matrix& y = tp.value_of(self);
    Matrix& da = tp.grad_buffer(ia);
    for (size_t i = 0; i < dc.data.size(); ++i)
      if (y.data[i] > 0.0) da.data[i] += dc.data[i];
  });
}

Var slice_rows(Var a, size_t begin, size_t end) {
  Tape& t = *a.tape();
  const Matrix& av = a.value();
  require(begin < end && end <= av.rows, "slice_rows: bad range");
  Matrix c(end - begin, av.cols);
  std::copy(av.data.begin() + static_cast<long>(begin * av.cols),
            av.data.begin() + static_cast<long>(end * av.cols), c.data.begin());
  const size_t ia = a.id();
  return t.push(std::move(c), t.needs_grad(a), [ia, begin](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    Matrix& da = tp.grad_buffer(ia);
    double* dst = da.data.data() + begin * da.cols;
    for (size_t i = 0; i < dc.data.size(); ++i) dst[i] += dc.data[i];
  });
}

Var slice_cols(Var a, size_t begin, size_t end) {
  Tape& t = *a.tape();
  const Matrix& av = a.value();
  require(begin < end && end <= av.cols, "slice_cols: bad range");
  const size_t w = end - begin;
  Matrix c(av.rows, w);
  for (size_t r = 0; r < av.rows; ++r)
    std::copy_n(av.data.begin() + static_cast<long>(r * av.cols + begin), w,
                c.data.begin() + static_cast<long>(r * w));
  const size_t ia = a.id();
  return t.push(std::move(c), t.needs_grad(a), [ia, begin](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    Matrix& da = tp.grad_buffer(ia);
    for (size_t r = 0; r < dc.rows; ++r)
      for (size_t j = 0; j < dc.cols; ++j) da(r, begin + j) += dc(r, j);
  });
}

Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows: nothing to join");
  Tape& t = *parts[0].tape();
  const size_t cols = parts[0].cols();
  size_t rows = 0;
  bool needs = false;
  for (const Var& p : parts) {
    require(p.cols() == cols, "concat_rows: column mismatch");
    rows += p.rows();
    needs = needs || t.needs_grad(p);
  }
  Matrix c(rows, cols);
  std::vector<size_t> ids;
  ids.reserve(parts.size());
  size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data.begin(), p.value().data.end(), c.data.begin() + static_cast<long>(offset));
    offset += p.value().size();
    ids.push_back(p.id());
  }
  return t.push(std::move(c), needs, [ids = std::move(ids)](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    size_t off = 0;
    for (size_t id : ids) {
      const size_t n = tp.value_of(id).size();
      if (tp.needs_grad(Var(&tp, id))) {
        Matrix& dp = tp.grad_buffer(id);
        for (size_t i = 0; i < n; ++i) dp.data[i] += dc.data[off + i];
      }
      off += n;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: nothing to join");
  Tape& t = *parts[0].tape();
  const size_t rows = parts[0].rows();
  size_t cols = 0;
  bool needs = false;
  for (const Var& p : parts) {
    require(p.rows() == rows, "concat_cols: row mismatch");
    cols += p.cols();
    needs = needs || t.needs_grad(p);
  }
  Matrix c(rows, cols);
  std::vector<size_t> ids;
  size_t offset = 0;
  for (const Var& p : parts) {
    const Matrix& pv = p.value();
    for (size_t r = 0; r < rows; ++r)
      std::copy_n(pv.data.begin() + static_cast<long>(r * pv.cols), pv.cols,
                  c.data.begin() + static_cast<long>(r * cols + offset));
    offset += pv.cols;
    ids.push_back(p.id());
  }
  return t.push(std::move(c), needs, [ids = std::move(ids)](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    size_t off = 0;
    for (size_t id : ids) {
      const size_t w = tp.value_of(id).cols;
      if (tp.needs_grad(Var(&tp, id))) {
        Matrix& dp = tp.grad_buffer(id);
        for (size_t r = 0; r < dc.rows; ++r)
          for (size_t j = 0; j < w; ++j) dp(r, j) += dc(r, off + j);
      }
      off += w;
    }
  });
}

Var softmax_rows(Var a) {
  Tape& t = *a.tape();
  Matrix c = a.value();
  for (size_t r = 0; r < c.rows; ++r) {
    auto row = c.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (auto& v : row) sum += (v = std::exp(v - mx));
    for (auto& v : row) v /= sum;
  }
  const size_t ia = a.id();
  return t.push(std::move(c), t.needs_grad(a), [ia](Tape& tp, size_t self) {
    const Matrix& dc = tp.grad_of(self);
    const Matrix& y = tp.value_of(self);
    Matrix& da = tp.grad_buffer(ia);
    for (size_t r = 0; r < y.rows; ++r) {
      double dot = 0.0;
      for (size_t j = 0; j < y.cols; ++j) dot += dc(r, j) * y(r, j);
      for (size_t j = 0; j < y.cols; ++j) da(r, j) += y(r, j) * (dc(r, j) - dot);
    }
  });
}

Var layer_norm(Var a, Var gamma, Var beta, double eps) {
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  const Matrix& g = gamma.value();
  const Matrix& b = beta.value();
  require(g.rows == 1 && g.cols == x.cols && b.same_shape(g), "layer_norm: parameter shape");
  const size_t n = x.cols;
  Matrix xhat(x.rows, n);
  std::vector<double> inv_std(x.rows);
  Matrix y(x.rows, n);
  for (size_t r = 0; r < x.rows; ++r) {
    const auto row = x.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (size_t j = 0; j < n; ++j) {
      xhat(r, j) = (row[j] - mean) * inv_std[r];
      y(r, j) = g.data[j] * xhat(r, j) + b.data[j];
    }
  }
  const size_t ia = a.id(), ig = gamma.id(), ib = beta.id();
  const bool needs = t.needs_grad(a) || t.needs_grad(gamma) || t.needs_grad(beta);
  return t.push(std::move(y), needs,
                [ia, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& tp, size_t self) {
                  const Matrix& dy = tp.grad_of(self);
                  const Matrix& gv = tp.value_of(ig);
                  const size_t cols = dy.cols;
                  if (tp.needs_grad(Var(&tp, ig))) {
                    Matrix& dg = tp.grad_buffer(ig);
                    for (size_t r = 0; r < dy.rows; ++r)
                      for (size_t j = 0; j < cols; ++j) dg.data[j] += dy(r, j) * xhat(r, j);
                  }
                  if (tp.needs_grad(Var(&tp, ib))) {
                    Matrix& db = tp.grad_buffer(ib);
                    for (size_t r = 0; r < dy.rows; ++r)
                      for (size_t j = 0; j < cols; ++j) db.data[j] += dy(r, j);
                  }
                  if (tp.needs_grad(Var(&tp, ia))) {
                    Matrix& dx = tp.grad_buffer(ia);
                    for (size_t r = 0; r < dy.rows; ++r) {
                      double mean_d = 0.0, mean_dx = 0.0;
                      for (size_t j = 0; j < cols; ++j) {
                        const double d = dy(r, j) * gv.data[j];
                        mean_d += d;
                        mean_dx += d * xhat(r, j);
                      }
                      mean_d /= static_cast<double>(cols);
                      mean_dx /= static_cast<double>(cols);
                      for (size_t j = 0; j < cols; ++j) {
                        const double d = dy(r, j) * gv.data[j];
                        dx(r, j) += inv_std[r] * (d - mean_d - xhat(r, j) * mean_dx);
                      }
                    }
                  }
                });
}

Var lstm_cell(Var gates, std::optional<Var> c_prev) {
  Tape& t = *gates.tape();
  const Matrix& gv = gates.value();
  require(gv.rows == 1 && gv.cols % 4 == 0, "lstm_cell: gates must be 1 x 4H");
  const size_t h = gv.cols / 4;
  if (c_prev) require(c_prev->rows() == 1 && c_prev->cols() == h, "lstm_cell: state shape");

  // act = [i | f | g | o] after nonlinearity.
  std::vector<double> act(4 * h);
  Matrix out(1, 2 * h);
  for (size_t j = 0; j < h; ++j) {
    const double i = sigmoid_scalar(gv.data[j]);
    const double f = sigmoid_scalar(gv.data[h + j]);
    const double g = std::tanh(gv.data[2 * h + j]);
    const double o = sigmoid_scalar(gv.data[3 * h + j]);
    act[j] = i;
    act[h + j] = f;
    act[2 * h + j] = g;
    act[3 * h + j] = o;
    const double cp = c_prev ? c_prev->value().data[j] : 0.0;
    const double c = f * cp + i * g;
    out.data[h + j] = c;
    out.data[j] = o * std::tanh(c);
  }
  const size_t ig = gates.id();
  const std::optional<size_t> ic = c_prev ? std::optional<size_t>(c_prev->id()) : std::nullopt;
  const bool needs = t.needs_grad(gates) || (c_prev && t.needs_grad(*c_prev));
  return t.push(std::move(out), needs, [ig, ic, h, act = std::move(act)](Tape& tp, size_t self) {
    const Matrix& d = tp.grad_of(self);
    const Matrix& y = tp.value_of(self);
    const Matrix* cp = ic ? &tp.value_of(*ic) : nullptr;
    Matrix* dcp = ic && tp.needs_grad(Var(&tp, *ic)) ? &tp.grad_buffer(*ic) : nullptr;
    Matrix* dg = tp.needs_grad(Var(&tp, ig)) ? &tp.grad_buffer(ig) : nullptr;
    for (size_t j = 0; j < h; ++j) {
      const double i = act[j], f = act[h + j], g = act[2 * h + j], o = act[3 * h + j];
      const double tc = std::tanh(y.data[h + j]);
      const double dh = d.data[j];
      const double dc = d.data[h + j] + dh * o * (1.0 - tc * tc);
      const double prev = cp ? cp->data[j] : 0.0;
      if (dg) {
        dg->data[j] += dc * g * i * (1.0 - i);
        dg->data[h + j] += dc * prev * f * (1.0 - f);
        dg->data[2 * h + j] += dc * i * (1.0 - g * g);
        dg->data[3 * h + j] += dh * tc * o * (1.0 - o);
      }
      if (dcp) dcp->data[j] += dc * f;
    }
  });
}

Var weighted_nll(Var logits, std::span<const uint16_t> labels, std::span<const double> weights) {
  Tape& t = *logits.tape();
  const Matrix& z = logits.value();
  require(labels.size() == z.rows, "weighted_nll: label count");
  require(weights.size() == z.cols, "weighted_nll: weight count");
  const double cap = -std::log(kMinProbability);
  Matrix probs(z.rows, z.cols);
  std::vector<uint8_t> capped(z.rows, 0);
  double total = 0.0;
  for (size_t r = 0; r < z.rows; ++r) {
    const auto row = z.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (size_t j = 0; j < z.cols; ++j) sum += (probs(r, j) = std::exp(row[j] - mx));
    for (size_t j = 0; j < z.cols; ++j) probs(r, j) /= sum;
    const size_t label = labels[r];
    require(label < z.cols, "weighted_nll: label out of range");
    double nll = mx + std::log(sum) - row[label];
    if (nll > cap) {
      nll = cap;
      capped[r] = 1;
    }
    total += weights[label] * nll;
  }
  Matrix out(1, 1, total);
  const size_t iz = logits.id();
  std::vector<uint16_t> lab(labels.begin(), labels.end());
  std::vector<double> w(weights.begin(), weights.end());
  return t.push(std::move(out), t.needs_grad(logits),
                [iz, probs = std::move(probs), capped = std::move(capped), lab = std::move(lab),
                 w = std::move(w)](Tape& tp, size_t self) {
                  const double g = tp.grad_of(self).data[0];
                  Matrix& dz = tp.grad_buffer(iz);
                  for (size_t r = 0; r < probs.rows; ++r) {
                    if (capped[r]) continue;
                    const double s = g * w[lab[r]];
                    if (s == 0.0) continue;
                    for (size_t j = 0; j < probs.cols; ++j) dz(r, j) += s * probs(r, j);
                    dz(r, lab[r]) -= s;
                  }
                });
}

}  // namespace apesed::ad
