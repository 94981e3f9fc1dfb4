#include "perfectoid/witt.hpp"

#include "perfectoid/errors.hpp"
#include "perfectoid/symstrict.hpp"

#include <bit>
#include <map>
#include <mutex>
#include <sstream>

namespace perfectoid {

namespace {

struct IntTerm {
    std::int64_t i;  // exponent of x is i / p^k
    std::int64_t j;  // exponent of y is j / p^k
    FqElem c;
};

// Carry polynomials with integer numerators over the common denominator p^k.
using IntCarries = std::vector<std::vector<IntTerm>>;

const IntCarries& int_carries(const Fq& fq, int N) {
    static std::mutex mu;
    static std::map<std::pair<std::int64_t, int>, IntCarries> memo;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(fq.p(), N);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    auto table = carry_table(fq.p(), N);
    IntCarries out;
    for (int k = 0; k < N; ++k) {
        const std::int64_t d = ipow(fq.p(), k);
        std::vector<IntTerm> level;
        for (const auto& t : table->polys[k]) {
            const Q a = t.ex * d, b = t.ey * d;
            if (a.denominator() != 1 || b.denominator() != 1) throw InternalError("carry table denominators");
            level.push_back({a.numerator(), b.numerator(), fq.from_int(t.c)});
        }
        out.push_back(std::move(level));
    }
    return memo.emplace(key, std::move(out)).first->second;
}

void require_same(const WittVec& x, const WittVec& y) {
    if (!same_field(x.field_ptr(), y.field_ptr())) throw ParameterError("WittVec: mismatched field parameters");
    if (x.N() != y.N()) throw ParameterError("WittVec: mismatched lengths");
}

// Powers r^0 .. r^m.
std::vector<PerfSeries> powers(const PerfSeries& r, std::int64_t m) {
    std::vector<PerfSeries> out{PerfSeries::one(r.field_ptr())};
    for (std::int64_t i = 1; i <= m; ++i) out.push_back(i == 1 ? r : ps_mul(out.back(), r));
    return out;
}

// Adds two Teichmuller terms at one level: returns P_0 and pushes P_k to level + k.
PerfSeries add_pair(const PerfSeries& a, const PerfSeries& b, int level, const IntCarries& carries,
                    std::vector<std::vector<PerfSeries>>& pending) {
    if (a.is_exact_zero()) return b;
    if (b.is_exact_zero()) return a;
    const int N = static_cast<int>(pending.size());
    PerfSeries ra = a, rb = b;
    for (int k = 1; level + k < N; ++k) {
        ra = ps_frobenius(ra, -1);
        rb = ps_frobenius(rb, -1);
        const auto& terms = carries[k];
        if (terms.empty()) continue;
        const std::int64_t d = ipow(a.field().p(), k);
        auto pa = powers(ra, d - 1), pb = powers(rb, d - 1);
        PerfSeries acc = PerfSeries::zero(a.field_ptr());
        for (const auto& t : terms) acc = ps_add(acc, ps_scale(ps_mul(pa[t.i], pb[t.j]), t.c));
        pending[level + k].push_back(std::move(acc));
    }
    return ps_add(a, b);
}

std::vector<PerfSeries> fold_levels(const FieldPtr& F, std::vector<std::vector<PerfSeries>> pending) {
    const int N = static_cast<int>(pending.size());
    const auto& carries = int_carries(F->fq, N);
    std::vector<PerfSeries> out;
    for (int n = 0; n < N; ++n) {
        PerfSeries acc = PerfSeries::zero(F);
        for (std::size_t i = 0; i < pending[n].size(); ++i) {
            PerfSeries t = pending[n][i];
            acc = add_pair(acc, t, n, carries, pending);
        }
        out.push_back(std::move(acc));
    }
    return out;
}

std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t m) {
    return static_cast<std::int64_t>(static_cast<__int128>(a) * b % m);
}

std::int64_t powmod(std::int64_t a, std::int64_t e, std::int64_t m) {
    std::int64_t r = 1 % m;
    a = mod_floor(a, m);
    for (; e > 0; e >>= 1) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
    }
    return r;
}

}  // namespace

WittVec::WittVec(FieldPtr F, std::vector<PerfSeries> coords) : F_(std::move(F)), coords_(std::move(coords)) {
    if (coords_.empty()) throw ParameterError("WittVec: at least one coordinate required");
    if (coords_.size() > static_cast<std::size_t>(kCarryTableMaxN))
        throw ParameterError("WittVec: length exceeds the carry-table cap " + std::to_string(kCarryTableMaxN));
    for (const auto& c : coords_)
        if (!same_field(c.field_ptr(), F_)) throw ParameterError("WittVec: coordinate from a different field");
}

WittVec WittVec::zero(FieldPtr F, int N) {
    std::vector<PerfSeries> c(N, PerfSeries::zero(F));
    return WittVec(std::move(F), std::move(c));
}

WittVec WittVec::one(FieldPtr F, int N) { return teichmuller(PerfSeries::one(F), N); }

WittVec WittVec::teichmuller(const PerfSeries& a, int N) {
    std::vector<PerfSeries> c(N, PerfSeries::zero(a.field_ptr()));
    c[0] = a;
    return WittVec(a.field_ptr(), std::move(c));
}

WittVec WittVec::from_int(FieldPtr F, int N, std::int64_t k) {
    const std::int64_t p = F->p();
    std::vector<PerfSeries> c;
    std::int64_t mod = ipow(p, N);
    std::int64_t cur = mod_floor(k, mod);
    for (int n = 0; n < N; ++n) {
        const std::int64_t d = cur % p;
        c.push_back(d == 0 ? PerfSeries::zero(F) : PerfSeries::constant(F, F->fq.from_int(d)));
        const std::int64_t omega = powmod(d, mod / p, mod);
        cur = mod_floor(cur - omega, mod) / p;
        mod /= p;
    }
    return WittVec(std::move(F), std::move(c));
}

bool WittVec::is_zero() const {
    for (const auto& c : coords_)
        if (!c.is_zero()) return false;
    return true;
}

bool WittVec::is_exact() const {
    for (const auto& c : coords_)
        if (!c.is_exact()) return false;
    return true;
}

std::string WittVec::to_string() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < coords_.size(); ++i) os << (i ? "; " : "") << coords_[i].to_string();
    os << ")";
    return os.str();
}

WittVec w_teichmuller(const PerfSeries& a, int N) { return WittVec::teichmuller(a, N); }
const std::vector<PerfSeries>& w_coords(const WittVec& x) { return x.coords(); }

WittVec w_add(const WittVec& x, const WittVec& y) {
    require_same(x, y);
    std::vector<std::vector<PerfSeries>> pending(x.N());
    for (int n = 0; n < x.N(); ++n) pending[n] = {x.coord(n), y.coord(n)};
    return WittVec(x.field_ptr(), fold_levels(x.field_ptr(), std::move(pending)));
}

WittVec w_neg(const WittVec& x) {
    if (x.field().p() == 2) return w_mul(x, WittVec::from_int(x.field_ptr(), x.N(), -1));
    std::vector<PerfSeries> c;
    for (const auto& a : x.coords()) c.push_back(ps_neg(a));
    return WittVec(x.field_ptr(), std::move(c));
}

WittVec w_sub(const WittVec& x, const WittVec& y) { return w_add(x, w_neg(y)); }

WittVec w_mul(const WittVec& x, const WittVec& y) {
    require_same(x, y);
    const int N = x.N();
    std::vector<std::vector<PerfSeries>> pending(N);
    for (int m = 0; m < N; ++m) {
        if (x.coord(m).is_exact_zero()) continue;
        for (int n = 0; m + n < N; ++n) {
            if (y.coord(n).is_exact_zero()) continue;
            pending[m + n].push_back(ps_mul(x.coord(m), y.coord(n)));
        }
    }
    return WittVec(x.field_ptr(), fold_levels(x.field_ptr(), std::move(pending)));
}

WittVec w_inv(const WittVec& x) {
    if (!x.is_unit()) throw NonUnitError("w_inv: leading Teichmuller coordinate vanishes at precision");
    const WittVec t = WittVec::teichmuller(ps_inv(x.coord(0)), x.N());
    const WittVec one = WittVec::one(x.field_ptr(), x.N());
    const WittVec d = w_sub(one, w_mul(x, t));
    WittVec s = one;
    for (int i = 1; i < x.N(); ++i) s = w_add(one, w_mul(d, s));
    return w_mul(t, s);
}

WittVec w_pow(const WittVec& x, std::int64_t n) {
    if (n < 0) return w_pow(w_inv(x), -n);
    WittVec r = WittVec::one(x.field_ptr(), x.N()), b = x;
    while (n > 0) {
        if (n & 1) r = w_mul(r, b);
        n >>= 1;
        if (n) b = w_mul(b, b);
    }
    return r;
}

WittVec w_frobenius(const WittVec& x, int k) {
    std::vector<PerfSeries> c;
    for (const auto& a : x.coords()) c.push_back(ps_frobenius(a, k));
    return WittVec(x.field_ptr(), std::move(c));
}

WittVec w_shift(const WittVec& x, int k) {
    if (k < 0) throw ParameterError("w_shift: negative shift");
    std::vector<PerfSeries> c(x.N(), PerfSeries::zero(x.field_ptr()));
    for (int n = 0; n + k < x.N(); ++n) c[n + k] = x.coord(n);
    return WittVec(x.field_ptr(), std::move(c));
}

bool w_equal(const WittVec& x, const WittVec& y) {
    require_same(x, y);
    for (int n = 0; n < x.N(); ++n)
        if (!ps_equal(x.coord(n), y.coord(n))) return false;
    return true;
}

bool w_identical(const WittVec& x, const WittVec& y) {
    if (x.N() != y.N()) return false;
    for (int n = 0; n < x.N(); ++n)
        if (!ps_identical(x.coord(n), y.coord(n))) return false;
    return true;
}

namespace {

NegLog min_norm(const WittVec& x, const Q& r, bool with_level) {
    std::optional<Q> finite, bound;
    const Q c = x.field().scale;
    for (int n = 0; n < x.N(); ++n) {
        const PerfSeries& a = x.coord(n);
        if (a.is_exact_zero()) continue;
        const Q base = with_level ? Q(n) : Q(0);
        if (!a.is_zero()) {
            const Q v = base + r * c * a.from_scaled(*a.val_scaled());
            if (!finite || v < *finite) finite = v;
        } else {
            const Q v = base + r * c * a.from_scaled(a.prec_scaled());
            if (!bound || v < *bound) bound = v;
        }
    }
    if (!finite && !bound) return NegLog::infinite();
    if (finite && (!bound || *finite < *bound)) return NegLog::finite(*finite);
    return NegLog::at_least(*bound);
}

}  // namespace

NegLog gauss_norm(const WittVec& x, const Q& r) {
    if (r <= 0) throw ParameterError("gauss_norm: r must be positive");
    return min_norm(x, r, true);
}

NegLog coeff_sup_norm(const WittVec& x) { return min_norm(x, Q(1), false); }

WittVec w_poly_eval(const WittPoly& P, const WittVec& x) {
    if (P.empty()) return WittVec::zero(x.field_ptr(), x.N());
    WittVec acc = P.back();
    for (std::size_t i = P.size() - 1; i-- > 0;) acc = w_add(w_mul(acc, x), P[i]);
    return acc;
}

WittPoly w_poly_derivative(const WittPoly& P) {
    WittPoly d;
    for (std::size_t i = 1; i < P.size(); ++i)
        d.push_back(w_mul(P[i], WittVec::from_int(P[i].field_ptr(), P[i].N(), static_cast<std::int64_t>(i))));
    return d;
}

HenselResult w_hensel_root(const WittPoly& P, const Q& r) {
    if (P.size() < 2) throw PreconditionError("w_hensel_root: polynomial of degree at least one required");
    if (!P[0].coord(0).is_zero()) throw PreconditionError("w_hensel_root: constant term is not divisible by p");
    if (!P[1].is_unit()) throw PreconditionError("w_hensel_root: linear coefficient is not a unit");
    const int N = P[0].N();
    const int bound = std::bit_width(static_cast<unsigned>(N - 1)) + 1;
    const WittPoly dP = w_poly_derivative(P);
    HenselResult res{WittVec::zero(P[0].field_ptr(), N), 0, {}};
    for (;;) {
        WittVec val = w_poly_eval(P, res.root);
        res.trace.push_back(gauss_norm(val, r));
        if (val.is_zero()) break;
        if (res.iterations >= bound)
            throw NonConvergenceError("w_hensel_root: no root at precision after " + std::to_string(bound) +
                                      " iterations");
        res.root = w_sub(res.root, w_mul(val, w_inv(w_poly_eval(dP, res.root))));
        ++res.iterations;
    }
    return res;
}

}  // namespace perfectoid
