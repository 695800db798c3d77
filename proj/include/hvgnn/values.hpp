#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hvgnn/errors.hpp"

// Eager double-precision values with the same operation surface as the tape
// values in autodiff.hpp. Numeric code is written once as a template and
// instantiated with either type: vecd for plain evaluation (and for the
// finite-difference oracles), ad::var when gradients are recorded.

namespace hvgnn {

struct vecd {
    std::vector<double> v;
    int r = 0, c = 1;

    vecd() = default;
    vecd(std::vector<double> data, int rows, int cols) : v(std::move(data)), r(rows), c(cols) {
        if (static_cast<int>(v.size()) != r * c)
            throw dimension_error("vecd: data size does not match shape");
    }

    static vecd scalar(double x) { return vecd({x}, 1, 1); }
    static vecd col(std::vector<double> data) {
        const int n = static_cast<int>(data.size());
        return vecd(std::move(data), n, 1);
    }
    static vecd matrix(int rows, int cols, std::vector<double> data) { return vecd(std::move(data), rows, cols); }

    int rows() const { return r; }
    int cols() const { return c; }
    int size() const { return r * c; }
    bool is_scalar() const { return r == 1 && c == 1; }
    double at(int i) const { return v[static_cast<std::size_t>(i)]; }
};

namespace detail {

inline void check_same_shape(const vecd& a, const vecd& b, const char* what) {
    if (a.r != b.r || a.c != b.c)
        throw dimension_error(std::string(what) + ": shape mismatch");
}

template <class F>
vecd broadcast_binary(const vecd& a, const vecd& b, F f, const char* what) {
    if (a.is_scalar() && !b.is_scalar()) {
        vecd out = b;
        for (auto& x : out.v) x = f(a.v[0], x);
        return out;
    }
    if (b.is_scalar() && !a.is_scalar()) {
        vecd out = a;
        for (auto& x : out.v) x = f(x, b.v[0]);
        return out;
    }
    check_same_shape(a, b, what);
    vecd out = a;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = f(a.v[i], b.v[i]);
    return out;
}

template <class F>
vecd unary(const vecd& a, F f) {
    vecd out = a;
    for (auto& x : out.v) x = f(x);
    return out;
}

} // namespace detail

inline vecd operator+(const vecd& a, const vecd& b) {
    return detail::broadcast_binary(a, b, [](double x, double y) { return x + y; }, "add");
}
inline vecd operator-(const vecd& a, const vecd& b) {
    return detail::broadcast_binary(a, b, [](double x, double y) { return x - y; }, "sub");
}
inline vecd operator*(const vecd& a, const vecd& b) {
    return detail::broadcast_binary(a, b, [](double x, double y) { return x * y; }, "mul");
}
inline vecd operator/(const vecd& a, const vecd& b) {
    return detail::broadcast_binary(a, b, [](double x, double y) { return x / y; }, "div");
}
inline vecd operator-(const vecd& a) {
    return detail::unary(a, [](double x) { return -x; });
}

inline vecd operator+(const vecd& a, double b) { return a + vecd::scalar(b); }
inline vecd operator+(double a, const vecd& b) { return vecd::scalar(a) + b; }
inline vecd operator-(const vecd& a, double b) { return a - vecd::scalar(b); }
inline vecd operator-(double a, const vecd& b) { return vecd::scalar(a) - b; }
inline vecd operator*(const vecd& a, double b) { return a * vecd::scalar(b); }
inline vecd operator*(double a, const vecd& b) { return vecd::scalar(a) * b; }
inline vecd operator/(const vecd& a, double b) { return a / vecd::scalar(b); }
inline vecd operator/(double a, const vecd& b) { return vecd::scalar(a) / b; }

inline vecd cosh(const vecd& a) { return detail::unary(a, [](double x) { return std::cosh(x); }); }
inline vecd sinh(const vecd& a) { return detail::unary(a, [](double x) { return std::sinh(x); }); }
inline vecd tanh(const vecd& a) { return detail::unary(a, [](double x) { return std::tanh(x); }); }
inline vecd exp(const vecd& a) { return detail::unary(a, [](double x) { return std::exp(x); }); }
inline vecd log(const vecd& a) { return detail::unary(a, [](double x) { return std::log(x); }); }
inline vecd sqrt(const vecd& a) { return detail::unary(a, [](double x) { return std::sqrt(x); }); }
inline vecd cos(const vecd& a) { return detail::unary(a, [](double x) { return std::cos(x); }); }
inline vecd sin(const vecd& a) { return detail::unary(a, [](double x) { return std::sin(x); }); }
inline vecd sigmoid(const vecd& a) {
    return detail::unary(a, [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); });
}
inline vecd softplus(const vecd& a) {
    // log(1 + e^x), overflow-safe for large |x|
    return detail::unary(a, [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); });
}

inline vecd sum(const vecd& a) {
    double s = 0.0;
    for (double x : a.v) s += x;
    return vecd::scalar(s);
}

inline vecd matmul(const vecd& a, const vecd& b) {
    if (a.c != b.r) throw dimension_error("matmul: inner dimensions differ");
    vecd out(std::vector<double>(static_cast<std::size_t>(a.r) * b.c, 0.0), a.r, b.c);
    for (int i = 0; i < a.r; ++i)
        for (int k = 0; k < a.c; ++k) {
            const double aik = a.v[static_cast<std::size_t>(i) * a.c + k];
            for (int j = 0; j < b.c; ++j)
                out.v[static_cast<std::size_t>(i) * b.c + j] += aik * b.v[static_cast<std::size_t>(k) * b.c + j];
        }
    return out;
}

/// Stacks two values as one flat column vector.
inline vecd concat(const vecd& a, const vecd& b) {
    std::vector<double> data;
    data.reserve(a.v.size() + b.v.size());
    data.insert(data.end(), a.v.begin(), a.v.end());
    data.insert(data.end(), b.v.begin(), b.v.end());
    return vecd::col(std::move(data));
}

inline vecd slice(const vecd& a, int offset, int len) {
    if (offset < 0 || len < 0 || offset + len > a.size())
        throw dimension_error("slice: range out of bounds");
    return vecd::col(std::vector<double>(a.v.begin() + offset, a.v.begin() + offset + len));
}

inline vecd clamp_min(const vecd& a, double lo) {
    return detail::unary(a, [lo](double x) { return x < lo ? lo : x; });
}

inline vecd logsumexp(const vecd& a) {
    if (a.size() == 0) throw dimension_error("logsumexp: empty input");
    double m = a.v[0];
    for (double x : a.v) m = std::max(m, x);
    double s = 0.0;
    for (double x : a.v) s += std::exp(x - m);
    return vecd::scalar(m + std::log(s));
}

inline vecd prepend_zero(const vecd& a) { return concat(vecd::scalar(0.0), a); }

inline vecd reshape(const vecd& a, int r, int c) {
    if (r * c != a.size()) throw dimension_error("reshape: element count mismatch");
    return vecd(a.v, r, c);
}

inline double value_of(const vecd& a) {
    if (!a.is_scalar()) throw contract_error("value_of: not a scalar");
    return a.v[0];
}

inline std::vector<double> values_of(const vecd& a) { return a.v; }

/// Constant factory; the tape counterpart lives in autodiff.hpp.
template <class V>
struct value_ctx;

template <>
struct value_ctx<vecd> {
    vecd scalar(double x) const { return vecd::scalar(x); }
    vecd vector(std::span<const double> data) const {
        return vecd::col(std::vector<double>(data.begin(), data.end()));
    }
    vecd matrix(int r, int c, std::span<const double> data) const {
        return vecd::matrix(r, c, std::vector<double>(data.begin(), data.end()));
    }
    // Parameters and constants are the same thing in eager mode.
    vecd param(std::span<const double> data, int r, int c) const {
        return vecd::matrix(r, c, std::vector<double>(data.begin(), data.end()));
    }
};

} // namespace hvgnn
