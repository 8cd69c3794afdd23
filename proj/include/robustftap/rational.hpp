#pragma once

// Exact rational scalar type and "p/q" string conversions shared by the
// whole library. Verdicts (arbitrage yes/no, duality gaps) are computed in
// exact arithmetic by default; doubles are an opt-in approximation.

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace rftap {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// Serialized form is "p" or "p/q" with q > 0 and gcd(p,q) = 1.
inline std::string to_fraction_string(const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

inline Rational parse_fraction(const std::string& s) {
    if (s.empty()) throw ModelError("empty rational literal");
    try {
        const auto slash = s.find('/');
        if (slash == std::string::npos) {
            // Accept plain integers and decimal literals like "1.25".
            const auto dot = s.find('.');
            if (dot == std::string::npos) return Rational(BigInt(s));
            const std::string ipart = s.substr(0, dot);
            const std::string fpart = s.substr(dot + 1);
            if (fpart.empty()) return Rational(BigInt(ipart));
            BigInt scale = 1;
            for (size_t i = 0; i < fpart.size(); ++i) scale *= 10;
            const bool neg = !ipart.empty() && ipart[0] == '-';
            const BigInt whole = ipart.empty() || ipart == "-" ? BigInt(0) : BigInt(ipart);
            const BigInt frac = BigInt(fpart);
            Rational r = Rational(whole) + (neg ? -Rational(frac, scale) : Rational(frac, scale));
            return r;
        }
        const BigInt num(s.substr(0, slash));
        const BigInt den(s.substr(slash + 1));
        if (den == 0) throw ModelError("rational with zero denominator: " + s);
        return Rational(num, den);
    } catch (const ModelError&) {
        throw;
    } catch (const std::exception&) {
        throw ModelError("malformed rational literal: " + s);
    }
}

inline Rational rational_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

// Extended value used for superhedging prices; -inf signals an unbounded
// hedge (a per-prior arbitrage), +inf an infeasible one.
struct ExtRational {
    enum Kind { Finite, NegInf, PosInf } kind = Finite;
    Rational value{};

    ExtRational() = default;
    ExtRational(Rational v) : kind(Finite), value(std::move(v)) {}  // NOLINT
    static ExtRational neg_inf() { return ExtRational(NegInf); }
    static ExtRational pos_inf() { return ExtRational(PosInf); }

    bool finite() const { return kind == Finite; }
    bool operator==(const ExtRational& o) const {
        return kind == o.kind && (kind != Finite || value == o.value);
    }
    bool operator<(const ExtRational& o) const {
        if (kind == NegInf) return o.kind != NegInf;
        if (kind == PosInf) return false;
        if (o.kind == PosInf) return true;
        if (o.kind == NegInf) return false;
        return value < o.value;
    }
    bool operator<=(const ExtRational& o) const { return *this == o || *this < o; }

    std::string str() const {
        if (kind == NegInf) return "-inf";
        if (kind == PosInf) return "+inf";
        return to_fraction_string(value);
    }

private:
    explicit ExtRational(Kind k) : kind(k) {}
};

}  // namespace rftap
