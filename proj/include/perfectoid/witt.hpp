#pragma once

#include "perfectoid/perfseries.hpp"

#include <string>
#include <vector>

namespace perfectoid {

// Truncated Witt vector sum_{n<N} p^n [x_n], stored by Teichmuller coordinates.
class WittVec {
public:
    WittVec(FieldPtr F, std::vector<PerfSeries> coords);

    static WittVec zero(FieldPtr F, int N);
    static WittVec one(FieldPtr F, int N);
    static WittVec teichmuller(const PerfSeries& a, int N);
    // Image of an integer k, using Teichmuller digits of k in Z_p.
    static WittVec from_int(FieldPtr F, int N, std::int64_t k);

    const Field& field() const { return *F_; }
    const FieldPtr& field_ptr() const { return F_; }
    int N() const { return static_cast<int>(coords_.size()); }
    const std::vector<PerfSeries>& coords() const { return coords_; }
    const PerfSeries& coord(int n) const { return coords_.at(n); }

    bool is_unit() const { return !coords_.front().is_zero(); }
    bool is_zero() const;
    bool is_exact() const;

    std::string to_string() const;

private:
    FieldPtr F_;
    std::vector<PerfSeries> coords_;
};

WittVec w_teichmuller(const PerfSeries& a, int N);
const std::vector<PerfSeries>& w_coords(const WittVec& x);

WittVec w_add(const WittVec& x, const WittVec& y);
WittVec w_neg(const WittVec& x);
WittVec w_sub(const WittVec& x, const WittVec& y);
WittVec w_mul(const WittVec& x, const WittVec& y);
WittVec w_inv(const WittVec& x);
WittVec w_pow(const WittVec& x, std::int64_t n);
WittVec w_frobenius(const WittVec& x, int k);
// Multiplication by p^k (k >= 0): coordinates move up k levels.
WittVec w_shift(const WittVec& x, int k);

// Coordinatewise equality at common precision.
bool w_equal(const WittVec& x, const WittVec& y);
bool w_identical(const WittVec& x, const WittVec& y);

inline WittVec operator+(const WittVec& a, const WittVec& b) { return w_add(a, b); }
inline WittVec operator-(const WittVec& a, const WittVec& b) { return w_sub(a, b); }
inline WittVec operator-(const WittVec& a) { return w_neg(a); }
inline WittVec operator*(const WittVec& a, const WittVec& b) { return w_mul(a, b); }

// -log_p |x|_r = min_n (n + r c v(x_n)) over stored coordinates. The result is
// AtLeast when a coordinate that vanishes only at its precision could lower it.
NegLog gauss_norm(const WittVec& x, const Q& r);
// min_n c v(x_n).
NegLog coeff_sup_norm(const WittVec& x);

// Polynomials over Witt vectors, coefficients from degree 0 upward.
using WittPoly = std::vector<WittVec>;

WittVec w_poly_eval(const WittPoly& P, const WittVec& x);
WittPoly w_poly_derivative(const WittPoly& P);

struct HenselResult {
    WittVec root;
    int iterations = 0;
    std::vector<NegLog> trace;  // -log_p |P(x_k)|_r before each update and at the end
};

// Newton-Raphson root x = 0 mod p of P with P_0 = 0 mod p and P_1 a unit.
HenselResult w_hensel_root(const WittPoly& P, const Q& r = Q(1));

}  // namespace perfectoid
