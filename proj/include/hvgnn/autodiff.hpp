#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hvgnn/errors.hpp"
#include "hvgnn/values.hpp"

// Reverse-mode automatic differentiation over scalars and small dense
// vectors/matrices. Forward values are computed eagerly while recording;
// backward() runs one reverse sweep over the tape. Values live in a flat
// arena so a training step is a single append-only pass plus one reversal.

namespace hvgnn::ad {

class tape;

/// Handle to one recorded value. Valid for exactly one tape generation.
struct var {
    tape* tp = nullptr;
    std::int32_t id = -1;
    std::uint32_t gen = 0;
    std::int32_t r = 0, c = 0;

    int rows() const { return r; }
    int cols() const { return c; }
    int size() const { return r * c; }
    bool is_scalar() const { return r == 1 && c == 1; }
};

enum class op_kind : std::uint8_t {
    leaf,
    constant,
    add,
    sub,
    mul,
    div,
    neg,
    matmul,
    cosh_op,
    sinh_op,
    tanh_op,
    exp_op,
    log_op,
    sqrt_op,
    cos_op,
    sin_op,
    sigmoid_op,
    softplus_op,
    sum_op,
    concat_op,
    slice_op,
    clamp_min_op,
    logsumexp_op,
};

class tape {
public:
    struct node {
        op_kind kind;
        bool requires_grad;
        std::int32_t a = -1, b = -1; // parent ids
        std::int32_t i0 = 0;         // slice offset
        std::int32_t off = 0;        // value arena offset
        std::int32_t n = 0;          // element count
        std::int32_t r = 0, c = 0;
        double aux = 0.0;            // clamp threshold
    };

    tape() = default;
    tape(const tape&) = delete;
    tape& operator=(const tape&) = delete;

    std::uint32_t generation() const { return gen_; }
    std::size_t size() const { return nodes_.size(); }

    /// Clears all nodes and invalidates every handle; capacity is retained.
    void reset() {
        nodes_.clear();
        val_.clear();
        adj_.clear();
        ++gen_;
    }

    var leaf(std::span<const double> data, int r, int c) { return make(op_kind::leaf, data, r, c, true); }
    var leaf_scalar(double x) { return leaf(std::span<const double>(&x, 1), 1, 1); }

    var constant(std::span<const double> data, int r, int c) { return make(op_kind::constant, data, r, c, false); }
    var constant_scalar(double x) { return constant(std::span<const double>(&x, 1), 1, 1); }
    var constant_col(std::span<const double> data) { return constant(data, static_cast<int>(data.size()), 1); }

    double* data(const var& v) {
        check(v);
        return val_.data() + nodes_[static_cast<std::size_t>(v.id)].off;
    }
    const double* data(const var& v) const {
        check(v);
        return val_.data() + nodes_[static_cast<std::size_t>(v.id)].off;
    }

    /// Reverse sweep from a scalar output. Populates adjoints for every node
    /// at or before the output; rerunning gives bit-identical results.
    void backward(const var& out) {
        check(out);
        if (out.size() != 1) throw contract_error("backward: output must be a scalar");
        adj_.assign(val_.size(), 0.0);
        adj_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(out.id)].off)] = 1.0;
        for (std::int32_t id = out.id; id >= 0; --id) accumulate(id);
        have_grads_ = true;
    }

    /// Gradient of the last backward() output with respect to v.
    std::vector<double> grad(const var& v) const {
        check(v);
        if (!have_grads_) throw contract_error("grad: backward() has not run on this tape generation");
        const node& nd = nodes_[static_cast<std::size_t>(v.id)];
        return std::vector<double>(adj_.begin() + nd.off, adj_.begin() + nd.off + nd.n);
    }

    // -- recorded operations ------------------------------------------------

    var add(const var& a, const var& b) { return binary(op_kind::add, a, b); }
    var sub(const var& a, const var& b) { return binary(op_kind::sub, a, b); }
    var mul(const var& a, const var& b) { return binary(op_kind::mul, a, b); }
    var div(const var& a, const var& b) { return binary(op_kind::div, a, b); }

    var neg(const var& a) { return unary(op_kind::neg, a); }
    var cosh(const var& a) { return unary(op_kind::cosh_op, a); }
    var sinh(const var& a) { return unary(op_kind::sinh_op, a); }
    var tanh(const var& a) { return unary(op_kind::tanh_op, a); }
    var exp(const var& a) { return unary(op_kind::exp_op, a); }
    var log(const var& a) { return unary(op_kind::log_op, a); }
    var sqrt(const var& a) { return unary(op_kind::sqrt_op, a); }
    var cos(const var& a) { return unary(op_kind::cos_op, a); }
    var sin(const var& a) { return unary(op_kind::sin_op, a); }
    var sigmoid(const var& a) { return unary(op_kind::sigmoid_op, a); }
    var softplus(const var& a) { return unary(op_kind::softplus_op, a); }

    var clamp_min(const var& a, double lo) {
        check(a);
        var out = alloc(op_kind::clamp_min_op, a.id, -1, a.r, a.c, a.size());
        node& nd = nodes_.back();
        nd.aux = lo;
        const double* x = val_.data() + nodes_[static_cast<std::size_t>(a.id)].off;
        double* y = val_.data() + nd.off;
        for (int i = 0; i < nd.n; ++i) y[i] = x[i] < lo ? lo : x[i];
        return out;
    }

    var sum(const var& a) {
        check(a);
        var out = alloc(op_kind::sum_op, a.id, -1, 1, 1, 1);
        const double* x = val_.data() + nodes_[static_cast<std::size_t>(a.id)].off;
        double s = 0.0;
        for (int i = 0; i < a.size(); ++i) s += x[i];
        val_[static_cast<std::size_t>(nodes_.back().off)] = s;
        return out;
    }

    var logsumexp(const var& a) {
        check(a);
        if (a.size() == 0) throw dimension_error("logsumexp: empty input");
        var out = alloc(op_kind::logsumexp_op, a.id, -1, 1, 1, 1);
        const double* x = val_.data() + nodes_[static_cast<std::size_t>(a.id)].off;
        double m = x[0];
        for (int i = 0; i < a.size(); ++i) m = std::max(m, x[i]);
        double s = 0.0;
        for (int i = 0; i < a.size(); ++i) s += std::exp(x[i] - m);
        val_[static_cast<std::size_t>(nodes_.back().off)] = m + std::log(s);
        return out;
    }

    var matmul(const var& a, const var& b) {
        check(a);
        check(b);
        if (a.c != b.r) throw dimension_error("matmul: inner dimensions differ");
        var out = alloc(op_kind::matmul, a.id, b.id, a.r, b.c, a.r * b.c);
        const double* A = val_.data() + nodes_[static_cast<std::size_t>(a.id)].off;
        const double* B = val_.data() + nodes_[static_cast<std::size_t>(b.id)].off;
        double* Z = val_.data() + nodes_.back().off;
        for (int i = 0; i < a.r * b.c; ++i) Z[i] = 0.0;
        for (int i = 0; i < a.r; ++i)
            for (int k = 0; k < a.c; ++k) {
                const double aik = A[i * a.c + k];
                for (int j = 0; j < b.c; ++j) Z[i * b.c + j] += aik * B[k * b.c + j];
            }
        return out;
    }

    var concat(const var& a, const var& b) {
        check(a);
        check(b);
        var out = alloc(op_kind::concat_op, a.id, b.id, a.size() + b.size(), 1, a.size() + b.size());
        const double* x = val_.data() + nodes_[static_cast<std::size_t>(a.id)].off;
        const double* y = val_.data() + nodes_[static_cast<std::size_t>(b.id)].off;
        double* z = val_.data() + nodes_.back().off;
        for (int i = 0; i < a.size(); ++i) z[i] = x[i];
        for (int i = 0; i < b.size(); ++i) z[a.size() + i] = y[i];
        return out;
    }

    var slice(const var& a, int offset, int len) {
        check(a);
        if (offset < 0 || len < 0 || offset + len > a.size()) throw dimension_error("slice: range out of bounds");
        var out = alloc(op_kind::slice_op, a.id, -1, len, 1, len);
        nodes_.back().i0 = offset;
        const double* x = val_.data() + nodes_[static_cast<std::size_t>(a.id)].off;
        double* y = val_.data() + nodes_.back().off;
        for (int i = 0; i < len; ++i) y[i] = x[offset + i];
        return out;
    }

    var reshape(const var& a, int r, int c) {
        check(a);
        if (r * c != a.size()) throw dimension_error("reshape: element count mismatch");
        var out = alloc(op_kind::slice_op, a.id, -1, r, c, a.size());
        nodes_.back().i0 = 0;
        const double* x = val_.data() + nodes_[static_cast<std::size_t>(a.id)].off;
        double* y = val_.data() + nodes_.back().off;
        for (int i = 0; i < a.size(); ++i) y[i] = x[i];
        return out;
    }

private:
    std::vector<node> nodes_;
    std::vector<double> val_;
    std::vector<double> adj_;
    std::uint32_t gen_ = 1;
    bool have_grads_ = false;

    void check(const var& v) const {
        if (v.tp != this) throw tape_error("value belongs to a different tape");
        if (v.gen != gen_) throw tape_error("value from a stale tape generation");
        if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) throw tape_error("invalid node id");
    }

    var alloc(op_kind kind, std::int32_t a, std::int32_t b, int r, int c, int n) {
        node nd;
        nd.kind = kind;
        nd.requires_grad = false;
        nd.a = a;
        nd.b = b;
        nd.off = static_cast<std::int32_t>(val_.size());
        nd.n = n;
        nd.r = r;
        nd.c = c;
        val_.resize(val_.size() + static_cast<std::size_t>(n));
        nodes_.push_back(nd);
        have_grads_ = false;
        var v;
        v.tp = this;
        v.id = static_cast<std::int32_t>(nodes_.size()) - 1;
        v.gen = gen_;
        v.r = r;
        v.c = c;
        return v;
    }

    var make(op_kind kind, std::span<const double> data, int r, int c, bool requires_grad) {
        if (static_cast<int>(data.size()) != r * c) throw dimension_error("leaf/constant: data size does not match shape");
        var out = alloc(kind, -1, -1, r, c, r * c);
        nodes_.back().requires_grad = requires_grad;
        double* y = val_.data() + nodes_.back().off;
        for (int i = 0; i < r * c; ++i) y[i] = data[static_cast<std::size_t>(i)];
        return out;
    }

    var binary(op_kind kind, const var& a, const var& b) {
        check(a);
        check(b);
        int r, c;
        if (a.is_scalar() && !b.is_scalar()) {
            r = b.r;
            c = b.c;
        } else if (b.is_scalar() && !a.is_scalar()) {
            r = a.r;
            c = a.c;
        } else {
            if (a.r != b.r || a.c != b.c) throw dimension_error("elementwise op: shape mismatch");
            r = a.r;
            c = a.c;
        }
        var out = alloc(kind, a.id, b.id, r, c, r * c);
        const node& na = nodes_[static_cast<std::size_t>(a.id)];
        const node& nb = nodes_[static_cast<std::size_t>(b.id)];
        const double* x = val_.data() + na.off;
        const double* y = val_.data() + nb.off;
        double* z = val_.data() + nodes_.back().off;
        const int n = r * c;
        const bool sa = na.n == 1, sb = nb.n == 1;
        for (int i = 0; i < n; ++i) {
            const double xv = sa ? x[0] : x[i];
            const double yv = sb ? y[0] : y[i];
            switch (kind) {
                case op_kind::add: z[i] = xv + yv; break;
                case op_kind::sub: z[i] = xv - yv; break;
                case op_kind::mul: z[i] = xv * yv; break;
                case op_kind::div: z[i] = xv / yv; break;
                default: throw contract_error("binary: bad op");
            }
        }
        return out;
    }

    var unary(op_kind kind, const var& a) {
        check(a);
        var out = alloc(kind, a.id, -1, a.r, a.c, a.size());
        const double* x = val_.data() + nodes_[static_cast<std::size_t>(a.id)].off;
        double* y = val_.data() + nodes_.back().off;
        for (int i = 0; i < a.size(); ++i) {
            const double v = x[i];
            switch (kind) {
                case op_kind::neg: y[i] = -v; break;
                case op_kind::cosh_op: y[i] = std::cosh(v); break;
                case op_kind::sinh_op: y[i] = std::sinh(v); break;
                case op_kind::tanh_op: y[i] = std::tanh(v); break;
                case op_kind::exp_op: y[i] = std::exp(v); break;
                case op_kind::log_op: y[i] = std::log(v); break;
                case op_kind::sqrt_op: y[i] = std::sqrt(v); break;
                case op_kind::cos_op: y[i] = std::cos(v); break;
                case op_kind::sin_op: y[i] = std::sin(v); break;
                case op_kind::sigmoid_op:
                    y[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
                    break;
                case op_kind::softplus_op: y[i] = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); break;
                default: throw contract_error("unary: bad op");
            }
        }
        return out;
    }

    void accumulate(std::int32_t id) {
        const node& nd = nodes_[static_cast<std::size_t>(id)];
        if (nd.kind == op_kind::leaf || nd.kind == op_kind::constant) return;
        const double* g = adj_.data() + nd.off;
        const double* z = val_.data() + nd.off;
        const node& pa = nodes_[static_cast<std::size_t>(nd.a)];
        const double* x = val_.data() + pa.off;
        double* gx = adj_.data() + pa.off;
        switch (nd.kind) {
            case op_kind::add:
            case op_kind::sub:
            case op_kind::mul:
            case op_kind::div: {
                const node& pb = nodes_[static_cast<std::size_t>(nd.b)];
                const double* y = val_.data() + pb.off;
                double* gy = adj_.data() + pb.off;
                const bool sa = pa.n == 1, sb = pb.n == 1;
                for (int i = 0; i < nd.n; ++i) {
                    const double gi = g[i];
                    const double xv = sa ? x[0] : x[i];
                    const double yv = sb ? y[0] : y[i];
                    double da = 0.0, db = 0.0;
                    switch (nd.kind) {
                        case op_kind::add: da = gi; db = gi; break;
                        case op_kind::sub: da = gi; db = -gi; break;
                        case op_kind::mul: da = gi * yv; db = gi * xv; break;
                        case op_kind::div: da = gi / yv; db = -gi * xv / (yv * yv); break;
                        default: break;
                    }
                    gx[sa ? 0 : i] += da;
                    gy[sb ? 0 : i] += db;
                }
                break;
            }
            case op_kind::neg:
                for (int i = 0; i < nd.n; ++i) gx[i] -= g[i];
                break;
            case op_kind::cosh_op:
                for (int i = 0; i < nd.n; ++i) gx[i] += g[i] * std::sinh(x[i]);
                break;
            case op_kind::sinh_op:
                for (int i = 0; i < nd.n; ++i) gx[i] += g[i] * std::cosh(x[i]);
                break;
            case op_kind::tanh_op:
                for (int i = 0; i < nd.n; ++i) gx[i] += g[i] * (1.0 - z[i] * z[i]);
                break;
            case op_kind::exp_op:
                for (int i = 0; i < nd.n; ++i) gx[i] += g[i] * z[i];
                break;
            case op_kind::log_op:
                for (int i = 0; i < nd.n; ++i) gx[i] += g[i] / x[i];
                break;
            case op_kind::sqrt_op:
                for (int i = 0; i < nd.n; ++i) gx[i] += g[i] * 0.5 / z[i];
                break;
            case op_kind::cos_op:
                for (int i = 0; i < nd.n; ++i) gx[i] -= g[i] * std::sin(x[i]);
                break;
            case op_kind::sin_op:
                for (int i = 0; i < nd.n; ++i) gx[i] += g[i] * std::cos(x[i]);
                break;
            case op_kind::sigmoid_op:
                for (int i = 0; i < nd.n; ++i) gx[i] += g[i] * z[i] * (1.0 - z[i]);
                break;
            case op_kind::softplus_op:
                for (int i = 0; i < nd.n; ++i) {
                    const double v = x[i];
                    const double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
                    gx[i] += g[i] * s;
                }
                break;
            case op_kind::sum_op:
                for (int i = 0; i < pa.n; ++i) gx[i] += g[0];
                break;
            case op_kind::logsumexp_op:
                for (int i = 0; i < pa.n; ++i) gx[i] += g[0] * std::exp(x[i] - z[0]);
                break;
            case op_kind::clamp_min_op:
                // Zero on the clamped side, including the boundary itself.
                for (int i = 0; i < nd.n; ++i)
                    if (x[i] > nd.aux) gx[i] += g[i];
                break;
            case op_kind::slice_op:
                for (int i = 0; i < nd.n; ++i) gx[nd.i0 + i] += g[i];
                break;
            case op_kind::concat_op: {
                const node& pb = nodes_[static_cast<std::size_t>(nd.b)];
                double* gy = adj_.data() + pb.off;
                for (int i = 0; i < pa.n; ++i) gx[i] += g[i];
                for (int i = 0; i < pb.n; ++i) gy[i] += g[pa.n + i];
                break;
            }
            case op_kind::matmul: {
                const node& pb = nodes_[static_cast<std::size_t>(nd.b)];
                const double* y = val_.data() + pb.off;
                double* gy = adj_.data() + pb.off;
                // Z = A(m,k) B(k,n): dA = G B^T, dB = A^T G
                const int m = pa.r, k = pa.c, n = pb.c;
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < k; ++j) {
                        double s = 0.0;
                        for (int t = 0; t < n; ++t) s += g[i * n + t] * y[j * n + t];
                        gx[i * k + j] += s;
                    }
                for (int j = 0; j < k; ++j)
                    for (int t = 0; t < n; ++t) {
                        double s = 0.0;
                        for (int i = 0; i < m; ++i) s += x[i * k + j] * g[i * n + t];
                        gy[j * n + t] += s;
                    }
                break;
            }
            default:
                throw contract_error("backward: unhandled op");
        }
    }
};

// -- free-function surface mirroring values.hpp -----------------------------

inline var operator+(const var& a, const var& b) { return a.tp->add(a, b); }
inline var operator-(const var& a, const var& b) { return a.tp->sub(a, b); }
inline var operator*(const var& a, const var& b) { return a.tp->mul(a, b); }
inline var operator/(const var& a, const var& b) { return a.tp->div(a, b); }
inline var operator-(const var& a) { return a.tp->neg(a); }

inline var operator+(const var& a, double b) { return a + a.tp->constant_scalar(b); }
inline var operator+(double a, const var& b) { return b.tp->constant_scalar(a) + b; }
inline var operator-(const var& a, double b) { return a - a.tp->constant_scalar(b); }
inline var operator-(double a, const var& b) { return b.tp->constant_scalar(a) - b; }
inline var operator*(const var& a, double b) { return a * a.tp->constant_scalar(b); }
inline var operator*(double a, const var& b) { return b.tp->constant_scalar(a) * b; }
inline var operator/(const var& a, double b) { return a / a.tp->constant_scalar(b); }
inline var operator/(double a, const var& b) { return b.tp->constant_scalar(a) / b; }

inline var cosh(const var& a) { return a.tp->cosh(a); }
inline var sinh(const var& a) { return a.tp->sinh(a); }
inline var tanh(const var& a) { return a.tp->tanh(a); }
inline var exp(const var& a) { return a.tp->exp(a); }
inline var log(const var& a) { return a.tp->log(a); }
inline var sqrt(const var& a) { return a.tp->sqrt(a); }
inline var cos(const var& a) { return a.tp->cos(a); }
inline var sin(const var& a) { return a.tp->sin(a); }
inline var sigmoid(const var& a) { return a.tp->sigmoid(a); }
inline var softplus(const var& a) { return a.tp->softplus(a); }
inline var sum(const var& a) { return a.tp->sum(a); }
inline var matmul(const var& a, const var& b) { return a.tp->matmul(a, b); }
inline var concat(const var& a, const var& b) { return a.tp->concat(a, b); }
inline var slice(const var& a, int offset, int len) { return a.tp->slice(a, offset, len); }
inline var reshape(const var& a, int r, int c) { return a.tp->reshape(a, r, c); }
inline var clamp_min(const var& a, double lo) { return a.tp->clamp_min(a, lo); }
inline var logsumexp(const var& a) { return a.tp->logsumexp(a); }
inline var prepend_zero(const var& a) { return concat(a.tp->constant_scalar(0.0), a); }

inline double value_of(const var& a) {
    if (!a.is_scalar()) throw contract_error("value_of: not a scalar");
    return a.tp->data(a)[0];
}

inline std::vector<double> values_of(const var& a) {
    const double* p = a.tp->data(a);
    return std::vector<double>(p, p + a.size());
}

} // namespace hvgnn::ad

namespace hvgnn {

template <>
struct value_ctx<ad::var> {
    ad::tape* tp = nullptr;

    ad::var scalar(double x) const { return tp->constant_scalar(x); }
    ad::var vector(std::span<const double> data) const { return tp->constant_col(data); }
    ad::var matrix(int r, int c, std::span<const double> data) const { return tp->constant(data, r, c); }
    ad::var param(std::span<const double> data, int r, int c) const { return tp->leaf(data, r, c); }
};

} // namespace hvgnn
