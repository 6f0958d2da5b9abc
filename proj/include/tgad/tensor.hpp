#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace tgad {

// Dense row-major tensor of 64-bit reals. The autodiff layer only ever uses
// rank-2 shapes (vectors are Mx1 or 1xN); checkpoints may carry any rank.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s);

    static Tensor zeros(int r, int c);
    static Tensor full(int r, int c, double v);
    static Tensor identity(int n);
    // Row-major construction helper for tests and fixtures.
    static Tensor from(int r, int c, std::initializer_list<double> values);

    int size() const { return static_cast<int>(data.size()); }
    int rows() const;
    int cols() const;
    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    double& operator()(int i, int j);
    double operator()(int i, int j) const;
    double& operator[](int i) { return data[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return data[static_cast<std::size_t>(i)]; }

    bool all_finite() const;
    std::string shape_str() const;
};

// C = op(A) x op(B) with optional transposes; shapes are validated.
Tensor matmul_raw(const Tensor& a, const Tensor& b, bool transpose_a = false,
                  bool transpose_b = false);

} // namespace tgad
