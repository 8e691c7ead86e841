#ifndef __TENSOR_HPP__
#define __TENSOR_HPP__

#include <cstdint>
#include <cstring>
#include <numeric>
#include <vector>

#include "common.hpp"

namespace anic {

// dense row-major tensor, last axis fastest
template <class S>
struct TensorT {
    std::vector<int64_t> shape;
    std::vector<S> data;

    TensorT() = default;
    explicit TensorT(std::vector<int64_t> s) : shape(std::move(s)) {
        data.assign((size_t)numel_of(shape), S(0));
    }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) {
            if (d < 0) throw invalid_arg_error("tensor: negative dim");
            n *= d;
        }
        return n;
    }

    static TensorT zeros(std::vector<int64_t> s) { return TensorT(std::move(s)); }
    static TensorT full(std::vector<int64_t> s, S v) {
        TensorT t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    int ndim() const { return (int)shape.size(); }
    int64_t numel() const { return (int64_t)data.size(); }
    int64_t dim(int i) const { return shape[(size_t)i]; }

    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    S& operator[](int64_t i) { return data[(size_t)i]; }
    const S& operator[](int64_t i) const { return data[(size_t)i]; }

    template <class... I>
    int64_t index(I... is) const {
        const int64_t ix[] = {(int64_t)is...};
        int64_t off = 0;
        for (size_t k = 0; k < sizeof...(is); k++) off = off * shape[k] + ix[k];
        return off;
    }
    template <class... I> S& at(I... is) { return data[(size_t)index(is...)]; }
    template <class... I> const S& at(I... is) const { return data[(size_t)index(is...)]; }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    template <class T2>
    TensorT<T2> cast() const {
        TensorT<T2> out(shape);
        for (int64_t i = 0; i < numel(); i++) out[i] = (T2)data[(size_t)i];
        return out;
    }

    void fill_gaussian(Rng& rng, double std_dev = 1.0) {
        for (auto& v : data) v = (S)(rng.gaussian() * std_dev);
    }
    void fill_uniform(Rng& rng, double lo, double hi) {
        for (auto& v : data) v = (S)rng.uniform(lo, hi);
    }
};

using TensorF = TensorT<float>;
using TensorD = TensorT<double>;

template <class S>
double max_abs_diff(const TensorT<S>& a, const TensorT<S>& b) {
    if (!a.same_shape(b)) throw invalid_arg_error("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (int64_t i = 0; i < a.numel(); i++)
        m = std::max(m, std::abs((double)a[i] - (double)b[i]));
    return m;
}

template <class S>
bool bit_equal(const TensorT<S>& a, const TensorT<S>& b) {
    if (!a.same_shape(b)) return false;
    return std::memcmp(a.ptr(), b.ptr(), sizeof(S) * (size_t)a.numel()) == 0;
}

}  // namespace anic

#endif  // __TENSOR_HPP__
