#include "pt/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>

#include "pt/errors.hpp"
#include "pt/log.hpp"

namespace pt {
inline namespace PT_REAL_NS {
namespace {

using RowMat =
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<RowMat>;
using ConstMap = Eigen::Map<const RowMat>;
using ArrMap = Eigen::Map<Eigen::Array<Real, Eigen::Dynamic, 1>>;
using ConstArrMap = Eigen::Map<const Eigen::Array<Real, Eigen::Dynamic, 1>>;

ConstMap as_mat(const Tensor& t, std::size_t rows, std::size_t cols,
                std::size_t offset = 0) {
  return ConstMap(t.data() + offset, static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(cols));
}
Map as_mat(Tensor& t, std::size_t rows, std::size_t cols,
           std::size_t offset = 0) {
  return Map(t.data() + offset, static_cast<Eigen::Index>(rows),
             static_cast<Eigen::Index>(cols));
}
ConstArrMap as_arr(const Tensor& t) {
  return ConstArrMap(t.data(), static_cast<Eigen::Index>(t.size()));
}
ArrMap as_arr(Tensor& t) {
  return ArrMap(t.data(), static_cast<Eigen::Index>(t.size()));
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       shape_str(a) + " and " + shape_str(b));
}

// True when `b` equals `a` or a trailing suffix of it.
bool broadcastable(const Shape& a, const Shape& b) {
  if (b.size() > a.size()) return false;
  return std::equal(b.rbegin(), b.rend(), a.rbegin());
}

// Adds `src` into `dst` where `dst` may be a broadcast (suffix-shaped)
// operand: sums over the leading dimensions.
void accumulate_broadcast(Tensor& dst, const Tensor& src) {
  const std::size_t n = dst.size();
  if (n == src.size()) {
    as_arr(dst) += as_arr(src);
    return;
  }
  const std::size_t reps = src.size() / n;
  as_arr(dst) += as_mat(src, reps, n).colwise().sum().transpose().array();
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sb.size() != 2 || sa.empty() || sa.back() != sb[0]) {
    shape_error("matmul", sa, sb);
  }
  const std::size_t m = a.value().rows(), k = sb[0], n = sb[1];
  Shape out_shape = sa;
  out_shape.back() = n;
  Tensor out(out_shape);
  as_mat(out, m, n).noalias() = as_mat(a.value(), m, k) * as_mat(b.value(), k, n);
  Var result = a.graph().record(std::move(out), {a, b});
  if (result.requires_grad()) {
    Node *na = a.node(), *nb = b.node(), *no = result.node();
    no->backward = [na, nb, no, m, k, n] {
      const auto dc = as_mat(no->own_grad, m, n);
      if (na->requires_grad) {
        as_mat(na->grad(), m, k).noalias() +=
            dc * as_mat(nb->value(), k, n).transpose();
      }
      if (nb->requires_grad) {
        as_mat(nb->grad(), k, n).noalias() +=
            as_mat(na->value(), m, k).transpose() * dc;
      }
    };
  }
  return result;
}

Var bmm(const Var& a, const Var& b, bool transpose_b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 3 || sb.size() != 3 || sa[0] != sb[0]) {
    shape_error("bmm", sa, sb);
  }
  const std::size_t groups = sa[0], m = sa[1], k = sa[2];
  const std::size_t n = transpose_b ? sb[1] : sb[2];
  if ((transpose_b ? sb[2] : sb[1]) != k) shape_error("bmm", sa, sb);
  Tensor out({groups, m, n});
  for (std::size_t g = 0; g < groups; ++g) {
    auto c = as_mat(out, m, n, g * m * n);
    auto am = as_mat(a.value(), m, k, g * m * k);
    if (transpose_b) {
      c.noalias() = am * as_mat(b.value(), n, k, g * n * k).transpose();
    } else {
      c.noalias() = am * as_mat(b.value(), k, n, g * k * n);
    }
  }
  Var result = a.graph().record(std::move(out), {a, b});
  if (result.requires_grad()) {
    Node *na = a.node(), *nb = b.node(), *no = result.node();
    no->backward = [na, nb, no, groups, m, k, n, transpose_b] {
      for (std::size_t g = 0; g < groups; ++g) {
        const auto dc = as_mat(no->own_grad, m, n, g * m * n);
        const auto am = as_mat(na->value(), m, k, g * m * k);
        if (transpose_b) {
          const auto bm = as_mat(nb->value(), n, k, g * n * k);
          if (na->requires_grad) {
            as_mat(na->grad(), m, k, g * m * k).noalias() += dc * bm;
          }
          if (nb->requires_grad) {
            as_mat(nb->grad(), n, k, g * n * k).noalias() += dc.transpose() * am;
          }
        } else {
          const auto bm = as_mat(nb->value(), k, n, g * k * n);
          if (na->requires_grad) {
            as_mat(na->grad(), m, k, g * m * k).noalias() += dc * bm.transpose();
          }
          if (nb->requires_grad) {
            as_mat(nb->grad(), k, n, g * k * n).noalias() += am.transpose() * dc;
          }
        }
      }
    };
  }
  return result;
}

Var add(const Var& a, const Var& b) {
  if (!broadcastable(a.shape(), b.shape())) shape_error("add", a.shape(), b.shape());
  Tensor out = a.value();
  const std::size_t nb = b.value().size();
  const std::size_t reps = out.size() / nb;
  as_mat(out, reps, nb).rowwise() +=
      Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>>(
          b.value().data(), static_cast<Eigen::Index>(nb));
  Var result = a.graph().record(std::move(out), {a, b});
  if (result.requires_grad()) {
    Node *na = a.node(), *nbn = b.node(), *no = result.node();
    no->backward = [na, nbn, no] {
      if (na->requires_grad) as_arr(na->grad()) += as_arr(no->own_grad);
      if (nbn->requires_grad) accumulate_broadcast(nbn->grad(), no->own_grad);
    };
  }
  return result;
}

Var mul(const Var& a, const Var& b) {
  if (!broadcastable(a.shape(), b.shape())) shape_error("mul", a.shape(), b.shape());
  const std::size_t nb = b.value().size();
  const std::size_t reps = a.value().size() / nb;
  Tensor out = a.value();
  as_mat(out, reps, nb).array().rowwise() *=
      Eigen::Map<const Eigen::Array<Real, 1, Eigen::Dynamic>>(
          b.value().data(), static_cast<Eigen::Index>(nb));
  Var result = a.graph().record(std::move(out), {a, b});
  if (result.requires_grad()) {
    Node *na = a.node(), *nbn = b.node(), *no = result.node();
    no->backward = [na, nbn, no, reps, nb] {
      const auto dc = as_mat(no->own_grad, reps, nb).array();
      const Eigen::Map<const Eigen::Array<Real, 1, Eigen::Dynamic>> brow(
          nbn->value().data(), static_cast<Eigen::Index>(nb));
      if (na->requires_grad) {
        as_mat(na->grad(), reps, nb).array() += dc.rowwise() * brow;
      }
      if (nbn->requires_grad) {
        Tensor prod = no->own_grad;
        as_mat(prod, reps, nb).array() *= as_mat(na->value(), reps, nb).array();
        accumulate_broadcast(nbn->grad(), prod);
      }
    };
  }
  return result;
}

Var scale(const Var& a, Real factor) {
  Tensor out = a.value();
  as_arr(out) *= factor;
  Var result = a.graph().record(std::move(out), {a});
  if (result.requires_grad()) {
    Node *na = a.node(), *no = result.node();
    no->backward = [na, no, factor] {
      as_arr(na->grad()) += factor * as_arr(no->own_grad);
    };
  }
  return result;
}

Var relu(const Var& a) {
  Tensor out = a.value();
  as_arr(out) = as_arr(out).max(Real(0));
  Var result = a.graph().record(std::move(out), {a});
  if (result.requires_grad()) {
    Node *na = a.node(), *no = result.node();
    no->backward = [na, no] {
      // relu'(0) is taken to be 0.
      as_arr(na->grad()) +=
          (as_arr(na->value()) > Real(0)).select(as_arr(no->own_grad), Real(0));
    };
  }
  return result;
}

Var tanh(const Var& a) {
  Tensor out = a.value();
  as_arr(out) = as_arr(out).tanh();
  Var result = a.graph().record(std::move(out), {a});
  if (result.requires_grad()) {
    Node *na = a.node(), *no = result.node();
    no->backward = [na, no] {
      const auto y = as_arr(no->own_value);
      as_arr(na->grad()) += as_arr(no->own_grad) * (Real(1) - y * y);
    };
  }
  return result;
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  return add(matmul(x, weight), bias);
}

Var softmax_rows(const Var& a, const Tensor* allowed) {
  const Tensor& x = a.value();
  if (allowed && allowed->shape() != x.shape()) {
    shape_error("softmax_rows mask", x.shape(), allowed->shape());
  }
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* in = x.data() + r * cols;
    const Real* ok = allowed ? allowed->data() + r * cols : nullptr;
    Real* y = out.data() + r * cols;
    Real mx = -std::numeric_limits<Real>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
      if (!ok || ok[c] != Real(0)) mx = std::max(mx, in[c]);
    }
    if (!std::isfinite(mx)) {
      throw ContractViolation("softmax_rows: row " + std::to_string(r) +
                              " has no allowed entries");
    }
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const Real e = (!ok || ok[c] != Real(0)) ? std::exp(in[c] - mx) : Real(0);
      y[c] = e;
      total += e;
    }
    const Real inv = static_cast<Real>(1.0 / total);
    for (std::size_t c = 0; c < cols; ++c) y[c] *= inv;
  }
  Var result = a.graph().record(std::move(out), {a});
  if (result.requires_grad()) {
    Node *na = a.node(), *no = result.node();
    no->backward = [na, no, rows, cols] {
      Tensor& dx = na->grad();
      const Tensor& y = no->own_value;
      const Tensor& dy = no->own_grad;
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t off = r * cols;
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += dy[off + c] * y[off + c];
        for (std::size_t c = 0; c < cols; ++c) {
          dx[off + c] += y[off + c] * (dy[off + c] - static_cast<Real>(dot));
        }
      }
    };
  }
  return result;
}

Var layernorm(const Var& a, const Var& gain, const Var& bias, Real epsilon) {
  const Tensor& x = a.value();
  const std::size_t d = x.cols();
  if (gain.value().size() != d || bias.value().size() != d ||
      gain.shape().size() != 1 || bias.shape().size() != 1) {
    shape_error("layernorm", x.shape(), gain.shape());
  }
  const std::size_t rows = x.rows();
  auto xhat = std::make_shared<Tensor>(x.shape());
  auto inv_std = std::make_shared<std::vector<Real>>(rows);
  Tensor out(x.shape());
  const Real* g = gain.value().data();
  const Real* bvec = bias.value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* in = x.data() + r * d;
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += in[c];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double z = in[c] - mean;
      var += z * z;
    }
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + epsilon);
    (*inv_std)[r] = static_cast<Real>(inv);
    Real* xh = xhat->data() + r * d;
    Real* y = out.data() + r * d;
    for (std::size_t c = 0; c < d; ++c) {
      xh[c] = static_cast<Real>((in[c] - mean) * inv);
      y[c] = xh[c] * g[c] + bvec[c];
    }
  }
  Var result = a.graph().record(std::move(out), {a, gain, bias});
  if (result.requires_grad()) {
    Node *na = a.node(), *ng = gain.node(), *nb = bias.node(), *no = result.node();
    no->backward = [na, ng, nb, no, xhat, inv_std, rows, d] {
      const Tensor& dy = no->own_grad;
      const Real* g = ng->value().data();
      if (ng->requires_grad || nb->requires_grad) {
        Tensor* dg = ng->requires_grad ? &ng->grad() : nullptr;
        Tensor* db = nb->requires_grad ? &nb->grad() : nullptr;
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < d; ++c) {
            const Real v = dy[r * d + c];
            if (dg) (*dg)[c] += v * (*xhat)[r * d + c];
            if (db) (*db)[c] += v;
          }
        }
      }
      if (!na->requires_grad) return;
      Tensor& dx = na->grad();
      std::vector<Real> dxh(d);
      for (std::size_t r = 0; r < rows; ++r) {
        double s1 = 0.0, s2 = 0.0;
        const Real* xh = xhat->data() + r * d;
        for (std::size_t c = 0; c < d; ++c) {
          dxh[c] = dy[r * d + c] * g[c];
          s1 += dxh[c];
          s2 += dxh[c] * xh[c];
        }
        const double inv = (*inv_std)[r];
        const double nd = static_cast<double>(d);
        for (std::size_t c = 0; c < d; ++c) {
          dx[r * d + c] += static_cast<Real>(
              inv / nd * (nd * dxh[c] - s1 - xh[c] * s2));
        }
      }
    };
  }
  return result;
}

Var mse_loss(const Var& pred, const Tensor& target, const Tensor& mask) {
  if (target.shape() != pred.shape()) shape_error("mse_loss", pred.shape(), target.shape());
  if (mask.shape() != pred.shape()) shape_error("mse_loss mask", pred.shape(), mask.shape());
  const Tensor& p = pred.value();
  double count = 0.0, total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (mask[i] == Real(0)) continue;
    const double e = static_cast<double>(p[i]) - target[i];
    total += mask[i] * e * e;
    count += mask[i];
  }
  if (count == 0.0) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      log_warning("mse_loss called with an all-zero mask; returning 0");
    }
  }
  const double denom = std::max(1.0, count);
  Var result = pred.graph().record(
      Tensor::scalar(static_cast<Real>(total / denom)), {pred});
  if (result.requires_grad() && count > 0.0) {
    Node *np = pred.node(), *no = result.node();
    auto tgt = std::make_shared<Tensor>(target);
    auto msk = std::make_shared<Tensor>(mask);
    no->backward = [np, no, tgt, msk, denom] {
      const Real upstream = no->own_grad[0];
      const Tensor& pv = np->value();
      Tensor& dp = np->grad();
      const Real k = static_cast<Real>(2.0 / denom) * upstream;
      for (std::size_t i = 0; i < pv.size(); ++i) {
        if ((*msk)[i] != Real(0)) dp[i] += k * (*msk)[i] * (pv[i] - (*tgt)[i]);
      }
    };
  }
  return result;
}

Var embedding(const Var& table, std::span<const std::int32_t> indices) {
  const Tensor& t = table.value();
  if (t.rank() != 2) throw DimensionError("embedding table must be 2-D, got " + shape_str(t.shape()));
  const std::size_t vocab = t.dim(0), d = t.dim(1);
  auto idx = std::make_shared<std::vector<std::int32_t>>(indices.begin(), indices.end());
  for (std::int32_t i : *idx) {
    if (i < 0 || static_cast<std::size_t>(i) >= vocab) {
      throw DimensionError("embedding index " + std::to_string(i) +
                           " out of range for table " + shape_str(t.shape()));
    }
  }
  Tensor out({idx->size(), d});
  for (std::size_t r = 0; r < idx->size(); ++r) {
    std::copy_n(t.data() + static_cast<std::size_t>((*idx)[r]) * d, d, out.data() + r * d);
  }
  Var result = table.graph().record(std::move(out), {table});
  if (result.requires_grad()) {
    Node *nt = table.node(), *no = result.node();
    no->backward = [nt, no, idx, d] {
      Tensor& dt = nt->grad();
      for (std::size_t r = 0; r < idx->size(); ++r) {
        Real* dst = dt.data() + static_cast<std::size_t>((*idx)[r]) * d;
        const Real* src = no->own_grad.data() + r * d;
        for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
      }
    };
  }
  return result;
}

Var dropout(const Var& a, Real p, Rng& rng) {
  if (p <= Real(0)) return a;
  if (p >= Real(1)) throw ContractViolation("dropout probability must be < 1");
  const Real keep_scale = Real(1) / (Real(1) - p);
  auto keep = std::make_shared<Tensor>(a.shape());
  constexpr double kInv53 = 1.0 / 9007199254740992.0;
  for (std::size_t i = 0; i < keep->size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) * kInv53;
    (*keep)[i] = u >= p ? keep_scale : Real(0);
  }
  Tensor out = a.value();
  as_arr(out) *= as_arr(*keep);
  Var result = a.graph().record(std::move(out), {a});
  if (result.requires_grad()) {
    Node *na = a.node(), *no = result.node();
    no->backward = [na, no, keep] {
      as_arr(na->grad()) += as_arr(no->own_grad) * as_arr(*keep);
    };
  }
  return result;
}

namespace {

// Moves [B, L, H, hd] <-> [B, H, L, hd]. `forward` selects the direction.
void permute_heads(const Real* src, Real* dst, std::size_t b, std::size_t l,
                   std::size_t h, std::size_t hd, bool forward, bool accumulate) {
  for (std::size_t bi = 0; bi < b; ++bi) {
    for (std::size_t li = 0; li < l; ++li) {
      for (std::size_t hi = 0; hi < h; ++hi) {
        const std::size_t blh = ((bi * l + li) * h + hi) * hd;
        const std::size_t bhl = ((bi * h + hi) * l + li) * hd;
        const Real* s = src + (forward ? blh : bhl);
        Real* t = dst + (forward ? bhl : blh);
        if (accumulate) {
          for (std::size_t e = 0; e < hd; ++e) t[e] += s[e];
        } else {
          std::copy_n(s, hd, t);
        }
      }
    }
  }
}

}  // namespace

Var split_heads(const Var& a, std::size_t heads) {
  const Shape& s = a.shape();
  if (s.size() != 3 || heads == 0 || s[2] % heads != 0) {
    throw DimensionError("split_heads: cannot split " + shape_str(s) + " into " +
                         std::to_string(heads) + " heads");
  }
  const std::size_t b = s[0], l = s[1], hd = s[2] / heads;
  Tensor out({b * heads, l, hd});
  permute_heads(a.value().data(), out.data(), b, l, heads, hd, true, false);
  Var result = a.graph().record(std::move(out), {a});
  if (result.requires_grad()) {
    Node *na = a.node(), *no = result.node();
    no->backward = [na, no, b, l, heads, hd] {
      permute_heads(no->own_grad.data(), na->grad().data(), b, l, heads, hd,
                    false, true);
    };
  }
  return result;
}

Var merge_heads(const Var& a, std::size_t heads) {
  const Shape& s = a.shape();
  if (s.size() != 3 || heads == 0 || s[0] % heads != 0) {
    throw DimensionError("merge_heads: cannot merge " + shape_str(s) + " over " +
                         std::to_string(heads) + " heads");
  }
  const std::size_t b = s[0] / heads, l = s[1], hd = s[2];
  Tensor out({b, l, heads * hd});
  permute_heads(a.value().data(), out.data(), b, l, heads, hd, false, false);
  Var result = a.graph().record(std::move(out), {a});
  if (result.requires_grad()) {
    Node *na = a.node(), *no = result.node();
    no->backward = [na, no, b, l, heads, hd] {
      permute_heads(no->own_grad.data(), na->grad().data(), b, l, heads, hd,
                    true, true);
    };
  }
  return result;
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractViolation("concat_rows needs at least one operand");
  const std::size_t cols = parts[0].shape().back();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.shape().size() != 2 || p.shape()[1] != cols) {
      shape_error("concat_rows", parts[0].shape(), p.shape());
    }
    rows += p.shape()[0];
  }
  Tensor out({rows, cols});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.data() + offset);
    offset += p.value().size();
  }
  Var result = parts[0].graph().record(std::move(out), parts);
  if (result.requires_grad()) {
    std::vector<Node*> inputs;
    for (const Var& p : parts) inputs.push_back(p.node());
    Node* no = result.node();
    no->backward = [inputs, no] {
      const Real* g = no->grad().data();
      for (Node* in : inputs) {
        const std::size_t n = in->value().size();
        if (in->requires_grad) {
          Real* dst = in->grad().data();
          for (std::size_t i = 0; i < n; ++i) dst[i] += g[i];
        }
        g += n;
      }
    };
  }
  return result;
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value();
  out.reshape(std::move(shape));
  Var result = a.graph().record(std::move(out), {a});
  if (result.requires_grad()) {
    Node *na = a.node(), *no = result.node();
    no->backward = [na, no] { as_arr(na->grad()) += as_arr(no->own_grad); };
  }
  return result;
}

Var sum(const Var& a) {
  double total = 0.0;
  for (Real v : a.value().values()) total += v;
  Var result = a.graph().record(Tensor::scalar(static_cast<Real>(total)), {a});
  if (result.requires_grad()) {
    Node *na = a.node(), *no = result.node();
    no->backward = [na, no] { as_arr(na->grad()) += no->own_grad[0]; };
  }
  return result;
}

}  // namespace PT_REAL_NS
}  // namespace pt
