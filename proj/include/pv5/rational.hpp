#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace pv5 {

/// Exact rational number with 64-bit reduced numerator/denominator and
/// 128-bit intermediates. Throws on overflow instead of degrading silently;
/// the magnitudes appearing in the rational-mode checks stay far below that.
class Rat {
public:
    Rat() : n_(0), d_(1) {}
    Rat(long long n) : n_(n), d_(1) {}
    Rat(long long n, long long d) { assign(n, d); }

    long long num() const { return n_; }
    long long den() const { return d_; }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return from128(i128(a.n_) * b.d_ + i128(b.n_) * a.d_, i128(a.d_) * b.d_);
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return from128(i128(a.n_) * b.d_ - i128(b.n_) * a.d_, i128(a.d_) * b.d_);
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return from128(i128(a.n_) * b.n_, i128(a.d_) * b.d_);
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.n_ == 0) throw std::domain_error("Rat: division by zero");
        return from128(i128(a.n_) * b.d_, i128(a.d_) * b.n_);
    }
    Rat operator-() const { Rat r; r.n_ = -n_; r.d_ = d_; return r; }

    Rat& operator+=(const Rat& b) { return *this = *this + b; }
    Rat& operator-=(const Rat& b) { return *this = *this - b; }
    Rat& operator*=(const Rat& b) { return *this = *this * b; }
    Rat& operator/=(const Rat& b) { return *this = *this / b; }

    friend bool operator==(const Rat& a, const Rat& b) { return a.n_ == b.n_ && a.d_ == b.d_; }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }

    bool is_zero() const { return n_ == 0; }
    bool is_integer() const { return d_ == 1; }
    double to_double() const { return double(n_) / double(d_); }

private:
    using i128 = __int128;

    void assign(long long n, long long d) {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        const long long g = std::gcd(n < 0 ? -n : n, d);
        n_ = g ? n / g : n;
        d_ = g ? d / g : d;
    }

    static Rat from128(i128 n, i128 d) {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        const i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        constexpr i128 lim = 0x7fffffffffffffffLL;
        if (n > lim || n < -lim || d > lim) throw std::overflow_error("Rat: overflow");
        Rat r;
        r.n_ = (long long)n;
        r.d_ = (long long)d;
        return r;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b) { const i128 t = a % b; a = b; b = t; }
        return a;
    }

    long long n_;
    long long d_;
};

/// Gaussian rational a + b*i. Enough field structure for every closed-form
/// identity in the package; no square roots are ever required there.
struct RatC {
    Rat re, im;

    RatC() = default;
    RatC(long long n) : re(n), im(0) {}
    RatC(const Rat& r) : re(r), im(0) {}
    RatC(const Rat& r, const Rat& i) : re(r), im(i) {}

    friend RatC operator+(const RatC& a, const RatC& b) { return {a.re + b.re, a.im + b.im}; }
    friend RatC operator-(const RatC& a, const RatC& b) { return {a.re - b.re, a.im - b.im}; }
    friend RatC operator*(const RatC& a, const RatC& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend RatC operator/(const RatC& a, const RatC& b) {
        const Rat n2 = b.re * b.re + b.im * b.im;
        if (n2.is_zero()) throw std::domain_error("RatC: division by zero");
        return {(a.re * b.re + a.im * b.im) / n2, (a.im * b.re - a.re * b.im) / n2};
    }
    RatC operator-() const { return {-re, -im}; }

    RatC& operator+=(const RatC& b) { return *this = *this + b; }
    RatC& operator-=(const RatC& b) { return *this = *this - b; }

    friend bool operator==(const RatC& a, const RatC& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const RatC& a, const RatC& b) { return !(a == b); }

    std::complex<double> to_cpx() const { return {re.to_double(), im.to_double()}; }
};

// Field probes for the templated algebra (complex<double> overloads live in
// complex2x2.hpp).
inline bool is_zero(const RatC& z) { return z.re.is_zero() && z.im.is_zero(); }
inline bool is_integer_value(const RatC& z) { return z.im.is_zero() && z.re.is_integer(); }

} // namespace pv5
