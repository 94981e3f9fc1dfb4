#pragma once

#include "perfectoid/fq.hpp"
#include "perfectoid/rational.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace perfectoid {

// Field context shared by all elements of one perfect Laurent-series field:
// residue field F_q, norm scale c (|x|' = p^{-c v(x)}), denominator bound p^M,
// and the relative working precision used when a result would otherwise be infinite.
struct Field {
    Fq fq;
    Q scale;
    int M;
    std::int64_t S;  // p^M
    Q e_max;

    std::int64_t p() const { return fq.p(); }
    bool operator==(const Field& o) const {
        return fq == o.fq && scale == o.scale && M == o.M && e_max == o.e_max;
    }
};

using FieldPtr = std::shared_ptr<const Field>;

FieldPtr make_field(const Fq& fq, Q scale, int M, Q e_max);
FieldPtr make_field(std::int64_t p, Q scale, int M, Q e_max);

// Cyclotomic scale p/(p-1) and Kummer scale 1.
Q cyclotomic_scale(std::int64_t p);
Q kummer_scale();

bool same_field(const FieldPtr& a, const FieldPtr& b);

// Sentinel precision of an exactly known element.
inline constexpr std::int64_t kExact = INT64_MAX;

// Exact value of -log_p of a norm: finite, +infinity (true zero), or a lower bound
// (an element that vanishes at its working precision).
struct NegLog {
    enum class Kind { Finite, Infinite, AtLeast };
    Kind kind = Kind::Infinite;
    Q value{0};

    static NegLog finite(Q v) { return {Kind::Finite, v}; }
    static NegLog infinite() { return {Kind::Infinite, Q(0)}; }
    static NegLog at_least(Q v) { return {Kind::AtLeast, v}; }

    bool is_finite() const { return kind == Kind::Finite; }
    // Best known lower bound; +infinity is reported as nullopt.
    std::optional<Q> lower() const {
        if (kind == Kind::Infinite) return std::nullopt;
        return value;
    }
    // True when the value is certified to be at least the bound.
    bool certifies(const Q& bound) const { return kind == Kind::Infinite || value >= bound; }
    std::string to_string() const;
};

// Valuation of a series together with the field scale.
struct NormExp {
    NegLog::Kind kind = NegLog::Kind::Infinite;
    Q v{0};
    Q scale{1};

    // -log_p |x|' = c * v.
    NegLog neglog() const;
    bool indistinguishable_from_zero() const { return kind == NegLog::Kind::AtLeast; }
};

// Exponent m/p^k in lowest terms.
class PExp {
public:
    PExp(Q value, std::int64_t p);
    const Q& value() const { return value_; }
    int denominator_exponent() const { return k_; }

private:
    Q value_;
    int k_;
};

// Truncated element of the completed perfect closure of F_q((t)).
// Exponents are stored as integers in units of 1/p^M.
class PerfSeries {
public:
    using Term = std::pair<std::int64_t, FqElem>;

    explicit PerfSeries(FieldPtr F);
    PerfSeries(FieldPtr F, std::vector<Term> terms, std::int64_t prec);

    static PerfSeries zero(FieldPtr F) { return PerfSeries(std::move(F)); }
    static PerfSeries zero_at(FieldPtr F, std::int64_t prec);
    static PerfSeries one(FieldPtr F);
    static PerfSeries constant(FieldPtr F, const FqElem& c);
    static PerfSeries monomial(FieldPtr F, const Q& e, const FqElem& c);
    static PerfSeries monomial(FieldPtr F, const Q& e);
    static PerfSeries from_rational_terms(FieldPtr F, const std::vector<std::pair<Q, FqElem>>& terms,
                                          std::optional<Q> prec);

    const Field& field() const { return *F_; }
    const FieldPtr& field_ptr() const { return F_; }
    const std::vector<Term>& terms() const { return terms_; }

    bool is_exact() const { return prec_ == kExact; }
    std::int64_t prec_scaled() const { return prec_; }
    std::optional<Q> prec() const;

    bool is_zero() const { return terms_.empty(); }
    bool is_exact_zero() const { return terms_.empty() && prec_ == kExact; }
    std::optional<std::int64_t> val_scaled() const;
    // Valuation, or the precision lower bound for a zero-at-precision series.
    std::int64_t effective_val_scaled() const;
    bool is_monomial() const { return terms_.size() == 1; }
    FqElem leading_coeff() const;
    // Coefficient at scaled exponent e (zero if absent).
    FqElem coeff_scaled(std::int64_t e) const;

    std::int64_t to_scaled(const Q& e) const;
    Q from_scaled(std::int64_t e) const;

    PerfSeries truncated(std::int64_t prec) const;

    std::string to_string() const;

private:
    FieldPtr F_;
    std::vector<Term> terms_;  // strictly increasing exponents, nonzero coefficients
    std::int64_t prec_ = kExact;
};

// Saturating precision arithmetic on scaled values.
std::int64_t prec_add(std::int64_t a, std::int64_t b);

PerfSeries ps_add(const PerfSeries& a, const PerfSeries& b);
PerfSeries ps_sub(const PerfSeries& a, const PerfSeries& b);
PerfSeries ps_neg(const PerfSeries& a);
PerfSeries ps_scale(const PerfSeries& a, const FqElem& c);
PerfSeries ps_mul(const PerfSeries& a, const PerfSeries& b);
PerfSeries ps_inv(const PerfSeries& a);
PerfSeries ps_div(const PerfSeries& a, const PerfSeries& b);
PerfSeries ps_pow(const PerfSeries& a, std::int64_t n);
PerfSeries ps_frobenius(const PerfSeries& a, int k);
NormExp ps_val(const PerfSeries& a);

// Equality at the common precision of the two inputs.
bool ps_equal(const PerfSeries& a, const PerfSeries& b);
// Bit-exact equality (terms and precision).
bool ps_identical(const PerfSeries& a, const PerfSeries& b);

inline PerfSeries operator+(const PerfSeries& a, const PerfSeries& b) { return ps_add(a, b); }
inline PerfSeries operator-(const PerfSeries& a, const PerfSeries& b) { return ps_sub(a, b); }
inline PerfSeries operator-(const PerfSeries& a) { return ps_neg(a); }
inline PerfSeries operator*(const PerfSeries& a, const PerfSeries& b) { return ps_mul(a, b); }

// Polynomials over the series field, coefficients listed from degree 0 upward.
using PsPoly = std::vector<PerfSeries>;

PerfSeries ps_poly_eval(const PsPoly& P, const PerfSeries& y);
PsPoly ps_poly_derivative(const PsPoly& P);

struct NewtonSegment {
    Q slope;
    int multiplicity;
    bool operator==(const NewtonSegment&) const = default;
};

// Lower convex hull of {(i, v(P_i))}; slopes ascending. A segment of slope s
// accounts for roots of valuation -s.
std::vector<NewtonSegment> newton_polygon(const PsPoly& P);

// Root of P with valuation want_val.
PerfSeries ps_root(const PsPoly& P, const Q& want_val);

}  // namespace perfectoid
