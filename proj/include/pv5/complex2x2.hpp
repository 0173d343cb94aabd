#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <utility>

namespace pv5 {

using Cpx = std::complex<double>;

/// 2x2 matrix over an arbitrary commutative field T (std::complex<double>
/// for numerics, RatC for the exact rational mode used in tests).
template <class T>
struct Mat2 {
    T a11{}, a12{}, a21{}, a22{};

    static Mat2 zero() { return {}; }
    static Mat2 identity() { return {T(1), T(0), T(0), T(1)}; }
    static Mat2 diag(const T& x, const T& y) { return {x, T(0), T(0), y}; }

    friend Mat2 operator+(const Mat2& a, const Mat2& b) {
        return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
    }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
    }
    Mat2 operator-() const { return {-a11, -a12, -a21, -a22}; }

    friend Mat2 operator*(const T& s, const Mat2& a) {
        return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
    }
    friend Mat2 operator*(const Mat2& a, const T& s) { return s * a; }
    friend Mat2 operator/(const Mat2& a, const T& s) {
        return {a.a11 / s, a.a12 / s, a.a21 / s, a.a22 / s};
    }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
                a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
    }

    Mat2& operator+=(const Mat2& b) { return *this = *this + b; }
    Mat2& operator-=(const Mat2& b) { return *this = *this - b; }
};

template <class T>
T trace(const Mat2<T>& a) { return a.a11 + a.a22; }

template <class T>
T det(const Mat2<T>& a) { return a.a11 * a.a22 - a.a12 * a.a21; }

template <class T>
Mat2<T> commutator(const Mat2<T>& a, const Mat2<T>& b) { return a * b - b * a; }

/// E = diag(1,0), the leading coefficient at the irregular point z = infinity.
template <class T>
Mat2<T> irregular_leading() { return Mat2<T>::diag(T(1), T(0)); }

using Mat2c = Mat2<Cpx>;

// Field probes for the templated algebra (exact tests, not tolerance gates).
inline bool is_zero(const Cpx& z) { return z == Cpx(0.0); }
inline bool is_integer_value(const Cpx& z) {
    return z.imag() == 0.0 && z.real() == std::nearbyint(z.real());
}

inline double frobenius_norm(const Mat2c& a) {
    return std::sqrt(std::norm(a.a11) + std::norm(a.a12) + std::norm(a.a21) + std::norm(a.a22));
}

inline double max_abs_entry(const Mat2c& a) {
    return std::max(std::max(std::abs(a.a11), std::abs(a.a12)),
                    std::max(std::abs(a.a21), std::abs(a.a22)));
}

/// Roots of lambda^2 - tr * lambda + det.
inline std::pair<Cpx, Cpx> eigenvalues(const Mat2c& a) {
    const Cpx half_tr = 0.5 * trace(a);
    const Cpx disc = std::sqrt(half_tr * half_tr - det(a));
    return {half_tr + disc, half_tr - disc};
}

} // namespace pv5
