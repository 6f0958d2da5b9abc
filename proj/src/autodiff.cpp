#include "tgad/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "tgad/errors.hpp"

namespace tgad {

namespace {

void expect(bool ok, const std::string& msg) {
    if (!ok) throw NumericError(msg);
}

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(AdNode&)> backprop) {
    auto n = std::make_shared<AdNode>();
    n->value = std::move(value);
    for (const Var& p : parents) {
        n->parents.push_back(p.node());
        n->requires_grad = n->requires_grad || p.requires_grad();
    }
    if (n->requires_grad) n->backprop = std::move(backprop);
    return Var(n);
}

Tensor map_unary(const Tensor& a, double (*f)(double)) {
    Tensor out(a.shape);
    for (int i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

} // namespace

Var Var::leaf(Tensor value, bool requires_grad) {
    auto n = std::make_shared<AdNode>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return Var(n);
}

const Tensor& Var::grad() const {
    node_->ensure_grad();
    return node_->grad;
}

double Var::scalar() const {
    expect(node_->value.size() == 1, "scalar(): var is not 1x1");
    return node_->value[0];
}

void backward(const Var& loss) {
    expect(loss.defined() && loss.value().size() == 1, "backward(): loss must be 1x1");
    // Iterative DFS post-order over grad-requiring nodes.
    std::vector<AdNode*> topo;
    std::unordered_set<AdNode*> seen;
    std::vector<std::pair<AdNode*, std::size_t>> stack;
    if (loss.node()->requires_grad) stack.emplace_back(loss.node().get(), 0);
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx == 0) {
            if (seen.count(node)) {
                stack.pop_back();
                continue;
            }
            seen.insert(node);
        }
        bool descended = false;
        while (idx < node->parents.size()) {
            AdNode* p = node->parents[idx++].get();
            if (p->requires_grad && !seen.count(p)) {
                stack.emplace_back(p, 0);
                descended = true;
                break;
            }
        }
        if (!descended && idx >= node->parents.size()) {
            topo.push_back(node);
            stack.pop_back();
        }
    }
    loss.node()->ensure_grad();
    loss.node()->grad[0] = 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        AdNode* n = *it;
        if (n->backprop && !n->grad.data.empty()) n->backprop(*n);
    }
}

Var matmul(const Var& a, const Var& b) {
    Tensor value = matmul_raw(a.value(), b.value());
    return make_op(std::move(value), {a, b}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        AdNode& B = *out.parents[1];
        if (A.requires_grad) {
            A.ensure_grad();
            Tensor da = matmul_raw(out.grad, B.value, false, true);
            for (int i = 0; i < da.size(); ++i) A.grad[i] += da[i];
        }
        if (B.requires_grad) {
            B.ensure_grad();
            Tensor db = matmul_raw(A.value, out.grad, true, false);
            for (int i = 0; i < db.size(); ++i) B.grad[i] += db[i];
        }
    });
}

Var transpose(const Var& a) {
    const Tensor& v = a.value();
    Tensor t({v.cols(), v.rows()});
    for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j < v.cols(); ++j) t(j, i) = v(i, j);
    return make_op(std::move(t), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.value.rows(); ++i)
            for (int j = 0; j < A.value.cols(); ++j) A.grad(i, j) += out.grad(j, i);
    });
}

Var add(const Var& a, const Var& b) {
    expect(a.value().same_shape(b.value()),
           "add: shape mismatch " + a.value().shape_str() + " vs " + b.value().shape_str());
    Tensor v(a.value().shape);
    for (int i = 0; i < v.size(); ++i) v[i] = a.value()[i] + b.value()[i];
    return make_op(std::move(v), {a, b}, [](AdNode& out) {
        for (int side = 0; side < 2; ++side) {
            AdNode& P = *out.parents[side];
            if (!P.requires_grad) continue;
            P.ensure_grad();
            for (int i = 0; i < P.grad.size(); ++i) P.grad[i] += out.grad[i];
        }
    });
}

Var add_rowvec(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    expect(bv.rows() == 1 && bv.cols() == av.cols(), "add_rowvec: bias must be 1x" +
                                                         std::to_string(av.cols()));
    Tensor v(av.shape);
    for (int i = 0; i < av.rows(); ++i)
        for (int j = 0; j < av.cols(); ++j) v(i, j) = av(i, j) + bv(0, j);
    return make_op(std::move(v), {a, b}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        AdNode& B = *out.parents[1];
        if (A.requires_grad) {
            A.ensure_grad();
            for (int i = 0; i < A.grad.size(); ++i) A.grad[i] += out.grad[i];
        }
        if (B.requires_grad) {
            B.ensure_grad();
            for (int i = 0; i < out.grad.rows(); ++i)
                for (int j = 0; j < out.grad.cols(); ++j) B.grad(0, j) += out.grad(i, j);
        }
    });
}

Var sub(const Var& a, const Var& b) {
    expect(a.value().same_shape(b.value()),
           "sub: shape mismatch " + a.value().shape_str() + " vs " + b.value().shape_str());
    Tensor v(a.value().shape);
    for (int i = 0; i < v.size(); ++i) v[i] = a.value()[i] - b.value()[i];
    return make_op(std::move(v), {a, b}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        AdNode& B = *out.parents[1];
        if (A.requires_grad) {
            A.ensure_grad();
            for (int i = 0; i < A.grad.size(); ++i) A.grad[i] += out.grad[i];
        }
        if (B.requires_grad) {
            B.ensure_grad();
            for (int i = 0; i < B.grad.size(); ++i) B.grad[i] -= out.grad[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    expect(a.value().same_shape(b.value()),
           "mul: shape mismatch " + a.value().shape_str() + " vs " + b.value().shape_str());
    Tensor v(a.value().shape);
    for (int i = 0; i < v.size(); ++i) v[i] = a.value()[i] * b.value()[i];
    return make_op(std::move(v), {a, b}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        AdNode& B = *out.parents[1];
        if (A.requires_grad) {
            A.ensure_grad();
            for (int i = 0; i < A.grad.size(); ++i) A.grad[i] += out.grad[i] * B.value[i];
        }
        if (B.requires_grad) {
            B.ensure_grad();
            for (int i = 0; i < B.grad.size(); ++i) B.grad[i] += out.grad[i] * A.value[i];
        }
    });
}

Var smul(const Var& a, double c) {
    Tensor v(a.value().shape);
    for (int i = 0; i < v.size(); ++i) v[i] = a.value()[i] * c;
    return make_op(std::move(v), {a}, [c](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.size(); ++i) A.grad[i] += out.grad[i] * c;
    });
}

Var add_scalar(const Var& a, double c) {
    Tensor v(a.value().shape);
    for (int i = 0; i < v.size(); ++i) v[i] = a.value()[i] + c;
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.size(); ++i) A.grad[i] += out.grad[i];
    });
}

Var neg(const Var& a) { return smul(a, -1.0); }

Var relu(const Var& a) {
    Tensor v(a.value().shape);
    for (int i = 0; i < v.size(); ++i) v[i] = a.value()[i] > 0 ? a.value()[i] : 0.0;
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.size(); ++i)
            if (A.value[i] > 0) A.grad[i] += out.grad[i];
    });
}

Var sigmoid(const Var& a) {
    Tensor v(a.value().shape);
    for (int i = 0; i < v.size(); ++i) {
        double x = a.value()[i];
        v[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.size(); ++i) {
            double s = out.value[i];
            A.grad[i] += out.grad[i] * s * (1.0 - s);
        }
    });
}

Var tanh(const Var& a) {
    Tensor v = map_unary(a.value(), [](double x) { return std::tanh(x); });
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.size(); ++i) {
            double y = out.value[i];
            A.grad[i] += out.grad[i] * (1.0 - y * y);
        }
    });
}

Var exp(const Var& a) {
    Tensor v = map_unary(a.value(), [](double x) { return std::exp(x); });
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.size(); ++i) A.grad[i] += out.grad[i] * out.value[i];
    });
}

Var log(const Var& a) {
    Tensor v = map_unary(a.value(), [](double x) { return std::log(x); });
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.size(); ++i) A.grad[i] += out.grad[i] / A.value[i];
    });
}

Var softplus(const Var& a) {
    Tensor v = map_unary(a.value(), [](double x) {
        return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
    });
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.size(); ++i) {
            double x = A.value[i];
            double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
            A.grad[i] += out.grad[i] * s;
        }
    });
}

Var sum(const Var& a) {
    Tensor v({1, 1});
    for (int i = 0; i < a.value().size(); ++i) v[0] += a.value()[i];
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.size(); ++i) A.grad[i] += out.grad[0];
    });
}

Var mean(const Var& a) {
    expect(a.value().size() > 0, "mean: empty tensor");
    Tensor v({1, 1});
    for (int i = 0; i < a.value().size(); ++i) v[0] += a.value()[i];
    v[0] /= a.value().size();
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        const double g = out.grad[0] / A.grad.size();
        for (int i = 0; i < A.grad.size(); ++i) A.grad[i] += g;
    });
}

Var gather_rows(const Var& a, std::vector<int> rows) {
    const Tensor& av = a.value();
    Tensor v({static_cast<int>(rows.size()), av.cols()});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        expect(rows[i] >= 0 && rows[i] < av.rows(), "gather_rows: index out of range");
        for (int j = 0; j < av.cols(); ++j) v(static_cast<int>(i), j) = av(rows[i], j);
    }
    return make_op(std::move(v), {a}, [rows = std::move(rows)](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (int j = 0; j < out.grad.cols(); ++j)
                A.grad(rows[i], j) += out.grad(static_cast<int>(i), j);
    });
}

Var row_sum(const Var& a) {
    const Tensor& av = a.value();
    Tensor v({av.rows(), 1});
    for (int i = 0; i < av.rows(); ++i)
        for (int j = 0; j < av.cols(); ++j) v(i, 0) += av(i, j);
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.rows(); ++i)
            for (int j = 0; j < A.grad.cols(); ++j) A.grad(i, j) += out.grad(i, 0);
    });
}

Var div_rowwise(const Var& a, const Var& d) {
    const Tensor& av = a.value();
    const Tensor& dv = d.value();
    expect(dv.rows() == av.rows() && dv.cols() == 1, "div_rowwise: divisor must be Mx1");
    Tensor v(av.shape);
    for (int i = 0; i < av.rows(); ++i)
        for (int j = 0; j < av.cols(); ++j) v(i, j) = av(i, j) / dv(i, 0);
    return make_op(std::move(v), {a, d}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        AdNode& D = *out.parents[1];
        if (A.requires_grad) {
            A.ensure_grad();
            for (int i = 0; i < A.grad.rows(); ++i)
                for (int j = 0; j < A.grad.cols(); ++j)
                    A.grad(i, j) += out.grad(i, j) / D.value(i, 0);
        }
        if (D.requires_grad) {
            D.ensure_grad();
            for (int i = 0; i < out.grad.rows(); ++i) {
                double acc = 0.0;
                const double den = D.value(i, 0);
                for (int j = 0; j < out.grad.cols(); ++j)
                    acc += out.grad(i, j) * A.value(i, j);
                D.grad(i, 0) -= acc / (den * den);
            }
        }
    });
}

Var clamp_unit(const Var& a) {
    Tensor v(a.value().shape);
    for (int i = 0; i < v.size(); ++i) v[i] = std::clamp(a.value()[i], 0.0, 1.0);
    return make_op(std::move(v), {a}, [](AdNode& out) {
        AdNode& A = *out.parents[0];
        A.ensure_grad();
        for (int i = 0; i < A.grad.size(); ++i) {
            double x = A.value[i];
            if (x > 0.0 && x < 1.0) A.grad[i] += out.grad[i];
        }
    });
}

Var scatter_edges(const Var& z, const std::vector<std::pair<int, int>>& edges, int n,
                  bool transposed) {
    const Tensor& zv = z.value();
    expect(zv.cols() == 1 && zv.rows() == static_cast<int>(edges.size()),
           "scatter_edges: gate vector must be Mx1 aligned with the edge list");
    Tensor v({n, n});
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto [src, dst] = edges[e];
        expect(src >= 0 && src < n && dst >= 0 && dst < n, "scatter_edges: node out of range");
        if (transposed)
            v(dst, src) = zv(static_cast<int>(e), 0);
        else
            v(src, dst) = zv(static_cast<int>(e), 0);
    }
    return make_op(std::move(v), {z}, [edges, transposed](AdNode& out) {
        AdNode& Z = *out.parents[0];
        Z.ensure_grad();
        for (std::size_t e = 0; e < edges.size(); ++e) {
            auto [src, dst] = edges[e];
            Z.grad(static_cast<int>(e), 0) +=
                transposed ? out.grad(dst, src) : out.grad(src, dst);
        }
    });
}

Var layer_norm(const Var& x, const Var& gain, const Var& shift, double eps) {
    const Tensor& xv = x.value();
    const int m = xv.rows();
    const int n = xv.cols();
    expect(gain.value().rows() == 1 && gain.value().cols() == n &&
               shift.value().rows() == 1 && shift.value().cols() == n,
           "layer_norm: gain/shift must be 1x" + std::to_string(n));
    Tensor xhat({m, n});
    std::vector<double> inv_std(m);
    for (int i = 0; i < m; ++i) {
        double mu = 0.0;
        for (int j = 0; j < n; ++j) mu += xv(i, j);
        mu /= n;
        double var = 0.0;
        for (int j = 0; j < n; ++j) {
            double d = xv(i, j) - mu;
            var += d * d;
        }
        var /= n;
        inv_std[i] = 1.0 / std::sqrt(var + eps);
        for (int j = 0; j < n; ++j) xhat(i, j) = (xv(i, j) - mu) * inv_std[i];
    }
    Tensor v({m, n});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) v(i, j) = gain.value()(0, j) * xhat(i, j) + shift.value()(0, j);
    return make_op(std::move(v), {x, gain, shift},
                   [xhat = std::move(xhat), inv_std = std::move(inv_std)](AdNode& out) {
                       AdNode& X = *out.parents[0];
                       AdNode& G = *out.parents[1];
                       AdNode& B = *out.parents[2];
                       const int m = xhat.rows();
                       const int n = xhat.cols();
                       if (G.requires_grad) {
                           G.ensure_grad();
                           for (int i = 0; i < m; ++i)
                               for (int j = 0; j < n; ++j)
                                   G.grad(0, j) += out.grad(i, j) * xhat(i, j);
                       }
                       if (B.requires_grad) {
                           B.ensure_grad();
                           for (int i = 0; i < m; ++i)
                               for (int j = 0; j < n; ++j) B.grad(0, j) += out.grad(i, j);
                       }
                       if (X.requires_grad) {
                           X.ensure_grad();
                           // dx = (dy*g - mean(dy*g) - xhat*mean(dy*g*xhat)) * inv_std
                           for (int i = 0; i < m; ++i) {
                               double mean_dg = 0.0;
                               double mean_dgx = 0.0;
                               for (int j = 0; j < n; ++j) {
                                   double dg = out.grad(i, j) * G.value(0, j);
                                   mean_dg += dg;
                                   mean_dgx += dg * xhat(i, j);
                               }
                               mean_dg /= n;
                               mean_dgx /= n;
                               for (int j = 0; j < n; ++j) {
                                   double dg = out.grad(i, j) * G.value(0, j);
                                   X.grad(i, j) +=
                                       (dg - mean_dg - xhat(i, j) * mean_dgx) * inv_std[i];
                               }
                           }
                       }
                   });
}

double grad_check(const std::function<Var(const std::map<std::string, Var>&)>& fragment,
                  const std::map<std::string, Tensor>& params, double eps) {
    std::map<std::string, Var> leaves;
    for (const auto& [name, t] : params) leaves[name] = Var::leaf(t, true);
    Var loss = fragment(leaves);
    backward(loss);

    auto eval_at = [&](std::map<std::string, Tensor>& point) {
        std::map<std::string, Var> vars;
        for (const auto& [name, t] : point) vars[name] = Var::leaf(t, false);
        return fragment(vars).scalar();
    };

    std::map<std::string, Tensor> point = params;
    double worst = 0.0;
    for (auto& [name, leaf] : leaves) {
        const Tensor& analytic = leaf.grad();
        Tensor& t = point.at(name);
        for (int i = 0; i < t.size(); ++i) {
            const double saved = t[i];
            t[i] = saved + eps;
            const double up = eval_at(point);
            t[i] = saved - eps;
            const double down = eval_at(point);
            t[i] = saved;
            const double fd = (up - down) / (2.0 * eps);
            const double rel = std::fabs(analytic[i] - fd) / std::max(1e-8, std::fabs(fd));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace tgad
