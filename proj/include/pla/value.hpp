#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

namespace pla {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& r);
std::string rational_to_string(const Rational& r);
Rational rational_from_string(const std::string& s);

// A truth value in [0,1]. Stays an exact rational as long as every operation
// on its path is rational-closed; switches to a double otherwise (gm with
// non-perfect roots, length^-beta with non-integer beta, ct-limits of gm).
class Value {
public:
    Value() : exact_(true), rat_(0), dbl_(0.0) {}
    static Value exact(Rational r) {
        Value v;
        v.exact_ = true;
        v.dbl_ = to_double(r);
        v.rat_ = std::move(r);
        return v;
    }
    static Value approx(double d) {
        Value v;
        v.exact_ = false;
        v.rat_ = 0;
        v.dbl_ = d;
        return v;
    }
    static Value zero() { return exact(Rational(0)); }
    static Value one() { return exact(Rational(1)); }

    bool is_exact() const { return exact_; }
    bool is_zero() const { return exact_ ? rat_ == 0 : dbl_ == 0.0; }
    bool is_one() const { return exact_ ? rat_ == 1 : dbl_ == 1.0; }
    const Rational& rat() const { return rat_; } // meaningful only when exact
    double dbl() const { return dbl_; }

    std::string str() const;

    friend Value operator+(const Value& a, const Value& b) {
        if (a.exact_ && b.exact_) return exact(a.rat_ + b.rat_);
        return approx(a.dbl_ + b.dbl_);
    }
    friend Value operator-(const Value& a, const Value& b) {
        if (a.exact_ && b.exact_) return exact(a.rat_ - b.rat_);
        return approx(a.dbl_ - b.dbl_);
    }
    friend Value operator*(const Value& a, const Value& b) {
        if (a.exact_ && b.exact_) return exact(a.rat_ * b.rat_);
        return approx(a.dbl_ * b.dbl_);
    }
    friend Value operator/(const Value& a, const Value& b) {
        if (a.exact_ && b.exact_) return exact(a.rat_ / b.rat_);
        return approx(a.dbl_ / b.dbl_);
    }
    friend bool operator<(const Value& a, const Value& b) {
        if (a.exact_ && b.exact_) return a.rat_ < b.rat_;
        return a.dbl_ < b.dbl_;
    }
    friend bool operator==(const Value& a, const Value& b) {
        if (a.exact_ && b.exact_) return a.rat_ == b.rat_;
        return a.dbl_ == b.dbl_;
    }

    Value clamp01() const;

private:
    bool exact_;
    Rational rat_;
    double dbl_;
};

inline const Value& vmin(const Value& a, const Value& b) { return b < a ? b : a; }
inline const Value& vmax(const Value& a, const Value& b) { return a < b ? b : a; }

// Exact k-th root of a nonnegative rational, if it is itself rational.
bool exact_kth_root(const Rational& r, unsigned k, Rational& out);

} // namespace pla
