#pragma once

#include "perfectoid/perfseries.hpp"
#include "perfectoid/witt.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace perfectoid {

// Arithmetic in Z/p^N with p^N < 2^62.
std::int64_t mod_mul(std::int64_t a, std::int64_t b, std::int64_t m);
std::int64_t mod_pow(std::int64_t a, std::uint64_t e, std::int64_t m);
std::int64_t mod_inv(std::int64_t a, std::int64_t m);
// Largest L with p^L < 2^62.
int max_level(std::int64_t p);

// An element of Z_p^x, known modulo p^L. When exact() the element is the
// nonnegative integer value() itself.
class GammaElt {
public:
    GammaElt(std::int64_t p, std::int64_t value, bool exact, std::string description);
    static GammaElt from_int(std::int64_t p, std::int64_t g);
    // "1+p^k", "1+p", or a (possibly negative) integer.
    static GammaElt parse(std::int64_t p, const std::string& text);

    std::int64_t p() const { return p_; }
    int level() const { return L_; }
    std::int64_t modulus() const { return mod_; }
    std::int64_t value() const { return value_; }
    bool exact() const { return exact_; }
    const std::string& description() const { return desc_; }
    bool is_one() const { return value_ == 1; }
    // v_p(gamma - 1); nullopt when gamma = 1 at the stored level.
    std::optional<int> v_minus_one() const;
    // Base-p digit i of the stored value.
    int digit(int i) const;
    // C(gamma, k) mod p^N.
    std::int64_t binomial(std::int64_t k, int N) const;

    friend bool operator==(const GammaElt& a, const GammaElt& b) {
        return a.p_ == b.p_ && a.value_ == b.value_ && a.exact_ == b.exact_;
    }

private:
    std::int64_t p_;
    int L_;
    std::int64_t mod_;
    std::int64_t value_;
    bool exact_;
    std::string desc_;
};

GammaElt gamma_mul(const GammaElt& a, const GammaElt& b);
GammaElt gamma_pow(const GammaElt& a, std::int64_t m);

// Truncated Laurent series sum c_n pi^n over Z/p^N. Coefficients above n_max
// are unknown; n_max = kExact means the series is exact. n_min is the lower end
// of the declared window.
class ASeries {
public:
    ASeries(std::int64_t p, int N, std::map<std::int64_t, std::int64_t> coeffs, std::int64_t n_max = kExact,
            std::optional<std::int64_t> n_min = std::nullopt);
    static ASeries zero(std::int64_t p, int N, std::int64_t n_max = kExact);
    static ASeries one(std::int64_t p, int N);
    static ASeries constant(std::int64_t p, int N, std::int64_t c);
    static ASeries monomial(std::int64_t p, int N, std::int64_t n, std::int64_t c = 1);

    std::int64_t p() const { return p_; }
    int N() const { return N_; }
    std::int64_t modulus() const { return mod_; }
    const std::map<std::int64_t, std::int64_t>& coeffs() const { return coeffs_; }
    std::int64_t coeff(std::int64_t n) const;
    std::int64_t n_min() const { return n_min_; }
    std::int64_t n_max() const { return n_max_; }
    bool is_exact() const { return n_max_ == kExact; }
    bool is_zero() const { return coeffs_.empty(); }
    // Lowest index with a nonzero coefficient.
    std::optional<std::int64_t> low() const;
    ASeries truncated(std::int64_t n_max) const;
    // Coefficients reduced modulo p^k (k <= N).
    ASeries reduced(int k) const;
    std::string to_string() const;

private:
    std::int64_t p_;
    int N_;
    std::int64_t mod_;
    std::map<std::int64_t, std::int64_t> coeffs_;
    std::int64_t n_max_;
    std::int64_t n_min_;
};

ASeries a_add(const ASeries& a, const ASeries& b);
ASeries a_sub(const ASeries& a, const ASeries& b);
ASeries a_neg(const ASeries& a);
ASeries a_scale(const ASeries& a, std::int64_t c);
ASeries a_mul(const ASeries& a, const ASeries& b);
ASeries a_pow(const ASeries& a, std::int64_t k);
// Inverse of a series with a unit coefficient; exact inputs need a window top
// unless the inverse is a monomial.
ASeries a_inv(const ASeries& a, std::optional<std::int64_t> top = std::nullopt);
// Same p-adic level; coefficients agree up to the smaller n_max.
bool a_equal(const ASeries& a, const ASeries& b);
bool a_identical(const ASeries& a, const ASeries& b);
// Raises the p-adic level: p^k * a at level N + k; requires N + k fits.
ASeries a_lift_level(const ASeries& a, int N, int shift);

// pi -> (1+pi)^p - 1.
ASeries a_phi(const ASeries& x);
// pi -> (1+pi)^gamma - 1. An exact input whose image is infinite needs a window top.
ASeries a_gamma(const ASeries& x, const GammaElt& g, std::optional<std::int64_t> top = std::nullopt);

// -log_p |x|_r = min_n (v_p(c_n) + n r c); AtLeast when the unknown tail could be smaller.
NegLog a_gauss_norm(const ASeries& x, const Q& r, const Q& scale);

// pi -> [1+t] - 1 into W_N(L), N = x.N(). Coordinate k carries precision (n_max+1)/p^k.
WittVec embed_a_to_w(const ASeries& x, const FieldPtr& F);
// The element [1+t] - 1.
WittVec pi_witt(const FieldPtr& F, int N);
// Largest r in {1, 1/2, 1/4, ...} with |pi - [t]|_r < |[t]|_r.
Q lift_radius(const FieldPtr& F, int N);

// Components of T: e in (0,1) with p-power denominator.
using TBarElt = std::map<Q, PerfSeries>;
using TElt = std::map<Q, ASeries>;

// (1+t)^e in L.
PerfSeries one_plus_t_pow(const FieldPtr& F, const Q& e);
WittVec embed_t_to_w(const TElt& z, const FieldPtr& F, int N);

// Gamma acting on L and coordinatewise on W(L).
PerfSeries l_gamma(const PerfSeries& a, const GammaElt& g);
WittVec w_gamma(const WittVec& x, const GammaElt& g);
// (gamma - 1)(a) for a in F_p((t)); the unknown tail gains p^{v(gamma-1)} - 1.
PerfSeries l_gamma_minus_one_int(const PerfSeries& a, const GammaElt& g);

struct GammaGap {
    NegLog gap;  // v((gamma-1)a) - v(a), valuation units with v(t) = 1
    Q bound;     // p^n
    bool meets_bound = false;
};
GammaGap gamma_contraction_check(const PerfSeries& a, int n, const GammaElt& g);

struct ModpDecomposition {
    PerfSeries integral;  // component e = 0
    TBarElt parts;        // components e in (0,1)
};
ModpDecomposition decompose_modp(const PerfSeries& x, int m);
PerfSeries recompose_modp(const ModpDecomposition& d);
PerfSeries tbar_to_series(const TBarElt& t, const FieldPtr& F);

struct GammaInverse {
    TBarElt z;
    int power = 1;            // m with gamma^m in 1 + p^n Z_p
    int contraction_level = 0;  // n = v(gamma^m - 1)
    int iterations = 0;
    NegLog residual;  // -log_p |(gamma-1)z - t|'
};
GammaInverse invert_gamma_minus1_modp(const TBarElt& t, const GammaElt& g, const FieldPtr& F);

struct GoodLift {
    ASeries lift;
    WittVec embedded;
    std::optional<Q> r0;  // largest grid radius with |x - [a]|_r < |x|_r; none for a = 0
};
GoodLift good_lift(const PerfSeries& a, int N);

struct SplitResult {
    ASeries y;
    TElt z;
    // Images in W_N(L), assembled level by level so that the p^j-part keeps its own precision.
    WittVec y_w;
    WittVec z_w;
    NegLog residual;  // -log_p |x - y - (gamma-1)z|_1
    bool certified = false;
};
SplitResult split_lift(const WittVec& x, const GammaElt& g);

// embed(y) + (gamma - 1)(embed(z)).
WittVec split_reassemble(const ASeries& y, const TElt& z, const GammaElt& g, const FieldPtr& F, int N);

}  // namespace perfectoid
