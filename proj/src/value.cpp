#include "pla/value.hpp"
#include "pla/errors.hpp"

#include <cmath>
#include <sstream>

namespace pla {

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string rational_to_string(const Rational& r) {
    std::ostringstream os;
    os << numerator(r);
    if (denominator(r) != 1) os << "/" << denominator(r);
    return os.str();
}

Rational rational_from_string(const std::string& s) {
    auto slash = s.find('/');
    auto dot = s.find('.');
    try {
        if (slash != std::string::npos) {
            Int num(s.substr(0, slash));
            Int den(s.substr(slash + 1));
            if (den == 0) fail(Errc::BadInput, "zero denominator in '" + s + "'");
            return Rational(num, den);
        }
        if (dot != std::string::npos) {
            Int whole = dot == 0 ? Int(0) : Int(s.substr(0, dot));
            std::string frac = s.substr(dot + 1);
            Int den = 1;
            Int num = 0;
            for (char c : frac) {
                if (c < '0' || c > '9') fail(Errc::BadInput, "bad decimal '" + s + "'");
                num = num * 10 + (c - '0');
                den *= 10;
            }
            return Rational(whole) + Rational(num, den);
        }
        return Rational(Int(s));
    } catch (const std::exception&) {
        fail(Errc::BadInput, "cannot parse rational '" + s + "'");
    }
}

std::string Value::str() const {
    if (exact_) return rational_to_string(rat_);
    std::ostringstream os;
    os.precision(17);
    os << dbl_;
    return os.str();
}

Value Value::clamp01() const {
    if (exact_) {
        if (rat_ < 0) return zero();
        if (rat_ > 1) return one();
        return *this;
    }
    if (dbl_ < 0.0) return approx(0.0);
    if (dbl_ > 1.0) return approx(1.0);
    return *this;
}

namespace {

// integer k-th root by Newton iteration; returns floor(x^(1/k))
Int ikroot(const Int& x, unsigned k) {
    if (x == 0 || x == 1 || k == 1) return x;
    // initial guess from the bit length: 2^ceil((msb+1)/k) >= x^(1/k)
    unsigned bits = boost::multiprecision::msb(x) + 1;
    Int g = Int(1) << (bits / k + 1);
    if (g < 1) g = 1;
    while (true) {
        // Newton step for g^k = x
        Int gk1 = 1;
        for (unsigned i = 0; i + 1 < k; ++i) gk1 *= g;
        Int next = ((k - 1) * g + x / gk1) / k;
        if (next >= g) break;
        g = next;
    }
    while (boost::multiprecision::pow(g, k) > x) --g;
    return g;
}

} // namespace

bool exact_kth_root(const Rational& r, unsigned k, Rational& out) {
    if (r < 0) return false;
    if (k == 0) return false;
    if (k == 1 || r == 0 || r == 1) {
        out = r;
        return true;
    }
    Int n = numerator(r), d = denominator(r);
    Int rn = ikroot(n, k), rd = ikroot(d, k);
    if (boost::multiprecision::pow(rn, k) == n && boost::multiprecision::pow(rd, k) == d) {
        out = Rational(rn, rd);
        return true;
    }
    return false;
}

} // namespace pla
