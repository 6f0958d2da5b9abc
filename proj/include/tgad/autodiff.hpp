#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tgad/tensor.hpp"

namespace tgad {

// Define-by-run reverse-mode differentiation over rank-2 tensors. Graphs are
// rebuilt every step; backward() runs one reverse sweep over a topological
// order of the recorded ops.

struct AdNode {
    Tensor value;
    Tensor grad; // allocated lazily, same shape as value
    bool requires_grad = false;
    std::vector<std::shared_ptr<AdNode>> parents;
    // Reads this->grad, accumulates into parents' grads.
    std::function<void(AdNode&)> backprop;

    void ensure_grad() {
        if (grad.data.empty()) grad = Tensor(value.shape);
    }
};

class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<AdNode> n) : node_(std::move(n)) {}

    // Leaf wrapping a value; requires_grad marks it trainable.
    static Var leaf(Tensor value, bool requires_grad);
    // Constant input (features, targets, frozen sampling noise).
    static Var constant(Tensor value) { return leaf(std::move(value), false); }

    const Tensor& value() const { return node_->value; }
    const Tensor& grad() const;
    bool requires_grad() const { return node_->requires_grad; }
    bool defined() const { return node_ != nullptr; }
    double scalar() const; // value of a 1x1 var

    std::shared_ptr<AdNode> node() const { return node_; }

private:
    std::shared_ptr<AdNode> node_;
};

// Seeds d(loss)/d(loss) = 1 and sweeps the graph in reverse topological
// order. `loss` must be 1x1.
void backward(const Var& loss);

// --- primitive ops ------------------------------------------------------
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);          // same shape
Var add_rowvec(const Var& a, const Var& b);   // MxN + 1xN broadcast
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);          // elementwise
Var smul(const Var& a, double c);
Var add_scalar(const Var& a, double c);
Var neg(const Var& a);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var softplus(const Var& a);                   // log(1 + e^x), stable
Var sum(const Var& a);                        // -> 1x1
Var mean(const Var& a);                       // -> 1x1
Var gather_rows(const Var& a, std::vector<int> rows);
Var row_sum(const Var& a);                    // MxN -> Mx1
Var div_rowwise(const Var& a, const Var& d);  // a(i,j) / d(i,0)
// Unit-interval clamp with pass-through gradient strictly inside (0,1); the
// hard-concrete gate relies on the zero subgradient outside.
Var clamp_unit(const Var& a);
// Dense n x n matrix from per-edge values: entry (src,dst) = z(e), or
// (dst,src) when `transposed` (the in-neighbor aggregation orientation).
Var scatter_edges(const Var& z, const std::vector<std::pair<int, int>>& edges, int n,
                  bool transposed);
// Per-row normalization over columns with learned gain/shift (both 1xN).
Var layer_norm(const Var& x, const Var& gain, const Var& shift, double eps = 1e-5);

// --- finite-difference harness ------------------------------------------
// Rebuilds the (deterministic) scalar fragment under coordinate-wise central
// differences and returns max over coordinates of
// |analytic - fd| / max(1e-8, |fd|).
double grad_check(const std::function<Var(const std::map<std::string, Var>&)>& fragment,
                  const std::map<std::string, Tensor>& params, double eps = 1e-5);

} // namespace tgad
