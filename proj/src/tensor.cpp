#include "tgad/tensor.hpp"

#include <cmath>
#include <sstream>

#include "tgad/errors.hpp"

namespace tgad {

namespace {
std::size_t numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}
} // namespace

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)), data(numel(shape), 0.0) {}

Tensor Tensor::zeros(int r, int c) { return Tensor({r, c}); }

Tensor Tensor::full(int r, int c, double v) {
    Tensor t({r, c});
    for (double& x : t.data) x = v;
    return t;
}

Tensor Tensor::identity(int n) {
    Tensor t({n, n});
    for (int i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

Tensor Tensor::from(int r, int c, std::initializer_list<double> values) {
    Tensor t({r, c});
    if (static_cast<int>(values.size()) != r * c)
        throw NumericError("Tensor::from: value count does not match shape");
    int i = 0;
    for (double v : values) t.data[i++] = v;
    return t;
}

int Tensor::rows() const {
    if (shape.size() != 2) throw NumericError("rows(): tensor is not rank-2");
    return shape[0];
}

int Tensor::cols() const {
    if (shape.size() != 2) throw NumericError("cols(): tensor is not rank-2");
    return shape[1];
}

double& Tensor::operator()(int i, int j) {
    return data[static_cast<std::size_t>(i) * shape[1] + j];
}

double Tensor::operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * shape[1] + j];
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor matmul_raw(const Tensor& a, const Tensor& b, bool transpose_a, bool transpose_b) {
    const int m = transpose_a ? a.cols() : a.rows();
    const int k = transpose_a ? a.rows() : a.cols();
    const int kb = transpose_b ? b.cols() : b.rows();
    const int n = transpose_b ? b.rows() : b.cols();
    if (k != kb)
        throw NumericError("matmul: inner dimensions disagree " + a.shape_str() + " vs " +
                           b.shape_str());
    Tensor c({m, n});
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            const double av = transpose_a ? a(p, i) : a(i, p);
            if (av == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                c(i, j) += av * (transpose_b ? b(j, p) : b(p, j));
            }
        }
    }
    return c;
}

} // namespace tgad
