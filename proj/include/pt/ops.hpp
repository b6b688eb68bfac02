#pragma once

#include <cstdint>
#include <span>

#include "pt/autodiff.hpp"

namespace pt {
inline namespace PT_REAL_NS {

// Matrix product. `a` is [..., k] (leading dims are flattened into rows),
// `b` is [k, n]; the result is [..., n].
Var matmul(const Var& a, const Var& b);

// Batched product over a leading group dimension: [G, m, k] x [G, k, n].
// With `transpose_b`, `b` is [G, n, k] and is used transposed.
Var bmm(const Var& a, const Var& b, bool transpose_b = false);

// Binary elementwise ops. `b` must match `a` exactly or match a trailing
// suffix of a's shape (broadcast along leading dims).
Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);

Var scale(const Var& a, Real factor);
Var relu(const Var& a);
Var tanh(const Var& a);

// Convenience: x @ weight + bias.
Var linear(const Var& x, const Var& weight, const Var& bias);

// Softmax over the last dimension with max subtraction. Where `allowed` is
// given (same shape as `a`, entries 0 or 1), disallowed entries get exactly
// zero weight. Every row must allow at least one entry.
Var softmax_rows(const Var& a, const Tensor* allowed = nullptr);

// Per-vector normalisation over the last dimension followed by an affine map.
Var layernorm(const Var& a, const Var& gain, const Var& bias,
              Real epsilon = Real(1e-5));

// sum(mask * (pred - target)^2) / max(1, sum(mask)). Gradient flows only
// into `pred`. An all-zero mask yields 0.
Var mse_loss(const Var& pred, const Tensor& target, const Tensor& mask);

// Row lookup into `table` [V, d]; result is [indices.size(), d].
Var embedding(const Var& table, std::span<const std::int32_t> indices);

// Inverted dropout. Identity when p == 0.
Var dropout(const Var& a, Real p, Rng& rng);

// [B, L, H*hd] -> [B*H, L, hd] and back.
Var split_heads(const Var& a, std::size_t heads);
Var merge_heads(const Var& a, std::size_t heads);

// Stacks 2-D operands with equal column counts: [r1, c] ++ [r2, c] -> [r1+r2, c].
Var concat_rows(std::span<const Var> parts);

Var reshape(const Var& a, Shape shape);
Var sum(const Var& a);

}  // namespace PT_REAL_NS
}  // namespace pt
