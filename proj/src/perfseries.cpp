#include "perfectoid/perfseries.hpp"

#include "perfectoid/errors.hpp"

#include <algorithm>
#include <sstream>

namespace perfectoid {

FieldPtr make_field(const Fq& fq, Q scale, int M, Q e_max) {
    if (scale <= Q(0)) throw ParameterError("norm scale must be positive");
    if (M < 0 || M > 30) throw ParameterError("denominator exponent M out of range");
    if (e_max <= 0) throw ParameterError("working precision must be positive");
    const std::int64_t S = ipow(fq.p(), M);
    std::int64_t probe;
    if (__builtin_mul_overflow(S, q_ceil(e_max) * 64, &probe)) throw ParameterError("p^M * e_max too large");
    return std::make_shared<const Field>(Field{fq, scale, M, S, e_max});
}

FieldPtr make_field(std::int64_t p, Q scale, int M, Q e_max) {
    return make_field(Fq::prime_field(p), scale, M, e_max);
}

Q cyclotomic_scale(std::int64_t p) { return Q(p, p - 1); }
Q kummer_scale() { return Q(1); }

bool same_field(const FieldPtr& a, const FieldPtr& b) { return a == b || *a == *b; }

std::string NegLog::to_string() const {
    switch (kind) {
        case Kind::Finite: return q_to_string(value);
        case Kind::Infinite: return "inf";
        case Kind::AtLeast: return ">=" + q_to_string(value);
    }
    return "?";
}

NegLog NormExp::neglog() const {
    if (kind == NegLog::Kind::Infinite) return NegLog::infinite();
    return {kind, scale * v};
}

PExp::PExp(Q value, std::int64_t p) : value_(value), k_(p_denominator_exponent(value, p)) {}

std::int64_t prec_add(std::int64_t a, std::int64_t b) {
    if (a == kExact || b == kExact) return kExact;
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) return a > 0 ? kExact : INT64_MIN / 2;
    return r;
}

namespace {

using Terms = std::vector<PerfSeries::Term>;

void require_same(const PerfSeries& a, const PerfSeries& b) {
    if (!same_field(a.field_ptr(), b.field_ptr())) throw ParameterError("PerfSeries: mismatched field parameters");
}

Terms cut(const Terms& t, std::int64_t cutoff) {
    if (cutoff == kExact) return t;
    Terms out;
    for (const auto& x : t) {
        if (x.first >= cutoff) break;
        out.push_back(x);
    }
    return out;
}

Terms add_terms(const Fq& fq, const Terms& a, const Terms& b, std::int64_t cutoff) {
    Terms out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        std::int64_t e;
        FqElem c;
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            e = a[i].first;
            c = a[i].second;
            ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
            e = b[j].first;
            c = b[j].second;
            ++j;
        } else {
            e = a[i].first;
            c = fq.add(a[i].second, b[j].second);
            ++i;
            ++j;
        }
        if (e >= cutoff) break;
        if (!Fq::is_zero(c)) out.emplace_back(e, c);
    }
    return out;
}

Terms mul_terms(const Fq& fq, const Terms& a, const Terms& b, std::int64_t cutoff) {
    if (a.empty() || b.empty()) return {};
    Terms prod;
    prod.reserve(a.size() * b.size());
    const bool prime = fq.f() == 1;
    const std::int64_t p = fq.p();
    for (const auto& x : a) {
        for (const auto& y : b) {
            std::int64_t e;
            if (__builtin_add_overflow(x.first, y.first, &e)) throw PrecisionError("exponent overflow");
            if (e >= cutoff) break;
            if (prime) {
                FqElem c;
                c.c[0] = static_cast<std::uint16_t>(static_cast<std::int64_t>(x.second.c[0]) * y.second.c[0] % p);
                prod.emplace_back(e, c);
            } else {
                prod.emplace_back(e, fq.mul(x.second, y.second));
            }
        }
    }
    std::sort(prod.begin(), prod.end(), [](const auto& u, const auto& v) { return u.first < v.first; });
    Terms out;
    out.reserve(prod.size());
    for (std::size_t i = 0; i < prod.size();) {
        std::size_t j = i;
        FqElem c = prod[i].second;
        for (++j; j < prod.size() && prod[j].first == prod[i].first; ++j) c = fq.add(c, prod[j].second);
        if (!Fq::is_zero(c)) out.emplace_back(prod[i].first, c);
        i = j;
    }
    return out;
}

}  // namespace

PerfSeries::PerfSeries(FieldPtr F) : F_(std::move(F)) {}

PerfSeries::PerfSeries(FieldPtr F, std::vector<Term> terms, std::int64_t prec)
    : F_(std::move(F)), prec_(prec) {
    std::sort(terms.begin(), terms.end(), [](const auto& u, const auto& v) { return u.first < v.first; });
    Terms merged;
    for (std::size_t i = 0; i < terms.size();) {
        std::size_t j = i;
        FqElem c = terms[i].second;
        for (++j; j < terms.size() && terms[j].first == terms[i].first; ++j) c = F_->fq.add(c, terms[j].second);
        if (!Fq::is_zero(c) && terms[i].first < prec_) merged.emplace_back(terms[i].first, c);
        i = j;
    }
    terms_ = std::move(merged);
}

PerfSeries PerfSeries::zero_at(FieldPtr F, std::int64_t prec) { return PerfSeries(std::move(F), {}, prec); }

PerfSeries PerfSeries::one(FieldPtr F) {
    FqElem c = F->fq.one();
    return PerfSeries(std::move(F), {{0, c}}, kExact);
}

PerfSeries PerfSeries::constant(FieldPtr F, const FqElem& c) { return PerfSeries(std::move(F), {{0, c}}, kExact); }

PerfSeries PerfSeries::monomial(FieldPtr F, const Q& e, const FqElem& c) {
    std::int64_t s = 0;
    {
        PerfSeries tmp(F);
        s = tmp.to_scaled(e);
    }
    return PerfSeries(std::move(F), {{s, c}}, kExact);
}

PerfSeries PerfSeries::monomial(FieldPtr F, const Q& e) {
    FqElem c = F->fq.one();
    return monomial(std::move(F), e, c);
}

PerfSeries PerfSeries::from_rational_terms(FieldPtr F, const std::vector<std::pair<Q, FqElem>>& terms,
                                           std::optional<Q> prec) {
    PerfSeries tmp(F);
    Terms t;
    for (const auto& [e, c] : terms) t.emplace_back(tmp.to_scaled(e), c);
    std::int64_t pr = kExact;
    if (prec) pr = q_floor(*prec * F->S);
    for (const auto& x : t)
        if (x.first >= pr) throw SchemaError("term exponent at or beyond the stated precision");
    return PerfSeries(std::move(F), std::move(t), pr);
}

std::optional<Q> PerfSeries::prec() const {
    if (prec_ == kExact) return std::nullopt;
    return from_scaled(prec_);
}

std::optional<std::int64_t> PerfSeries::val_scaled() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.front().first;
}

std::int64_t PerfSeries::effective_val_scaled() const {
    if (terms_.empty()) return prec_;
    return terms_.front().first;
}

FqElem PerfSeries::leading_coeff() const {
    if (terms_.empty()) throw DivisionByZeroError("leading coefficient of zero series");
    return terms_.front().second;
}

FqElem PerfSeries::coeff_scaled(std::int64_t e) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), e,
                               [](const Term& t, std::int64_t x) { return t.first < x; });
    if (it != terms_.end() && it->first == e) return it->second;
    return FqElem{};
}

std::int64_t PerfSeries::to_scaled(const Q& e) const {
    const Q s = e * F_->S;
    if (s.denominator() != 1) {
        if (!is_p_power(e.denominator(), F_->p()))
            throw SchemaError("exponent " + q_to_string(e) + " has a denominator that is not a power of p");
        throw PrecisionError("exponent " + q_to_string(e) + " exceeds the denominator bound p^" + std::to_string(F_->M));
    }
    return s.numerator();
}

Q PerfSeries::from_scaled(std::int64_t e) const { return Q(e, F_->S); }

PerfSeries PerfSeries::truncated(std::int64_t prec) const {
    if (prec >= prec_) return *this;
    PerfSeries out(F_);
    out.terms_ = cut(terms_, prec);
    out.prec_ = prec;
    return out;
}

std::string PerfSeries::to_string() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        auto v = F_->fq.to_vector(c);
        if (v.size() == 1) {
            os << v[0];
        } else {
            os << "(";
            for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
            os << ")";
        }
        os << "*t^" << q_to_string(from_scaled(e));
    }
    if (first) os << "0";
    if (prec_ != kExact) os << " + O(t^" << q_to_string(from_scaled(prec_)) << ")";
    return os.str();
}

PerfSeries ps_add(const PerfSeries& a, const PerfSeries& b) {
    require_same(a, b);
    const std::int64_t prec = std::min(a.prec_scaled(), b.prec_scaled());
    return PerfSeries(a.field_ptr(), add_terms(a.field().fq, a.terms(), b.terms(), prec), prec);
}

PerfSeries ps_neg(const PerfSeries& a) {
    Terms t;
    t.reserve(a.terms().size());
    for (const auto& [e, c] : a.terms()) t.emplace_back(e, a.field().fq.neg(c));
    return PerfSeries(a.field_ptr(), std::move(t), a.prec_scaled());
}

PerfSeries ps_sub(const PerfSeries& a, const PerfSeries& b) { return ps_add(a, ps_neg(b)); }

PerfSeries ps_scale(const PerfSeries& a, const FqElem& c) {
    Terms t;
    if (!Fq::is_zero(c))
        for (const auto& [e, x] : a.terms()) t.emplace_back(e, a.field().fq.mul(x, c));
    return PerfSeries(a.field_ptr(), std::move(t), Fq::is_zero(c) ? kExact : a.prec_scaled());
}

PerfSeries ps_mul(const PerfSeries& a, const PerfSeries& b) {
    require_same(a, b);
    const std::int64_t prec = std::min(prec_add(a.prec_scaled(), b.effective_val_scaled()),
                                       prec_add(b.prec_scaled(), a.effective_val_scaled()));
    return PerfSeries(a.field_ptr(), mul_terms(a.field().fq, a.terms(), b.terms(), prec), prec);
}

PerfSeries ps_inv(const PerfSeries& a) {
    if (a.is_zero()) throw DivisionByZeroError("ps_inv of a series that vanishes at working precision");
    const Fq& fq = a.field().fq;
    const std::int64_t v0 = a.terms().front().first;
    const FqElem c0inv = fq.inv(a.terms().front().second);
    if (a.is_monomial() && a.is_exact()) return PerfSeries(a.field_ptr(), {{-v0, c0inv}}, kExact);
    // Relative precision of the unit part 1 + u.
    const std::int64_t rel = a.is_exact() ? q_floor(a.field().e_max * a.field().S) : a.prec_scaled() - v0;
    Terms w;
    for (const auto& [e, c] : a.terms()) w.emplace_back(e - v0, fq.mul(c, c0inv));
    Terms y{{0, fq.one()}};
    std::int64_t cur = w.size() > 1 ? w[1].first : rel;
    if (cur > rel) cur = rel;
    // Newton iteration y <- y + y(1 - w y), doubling the relative precision.
    while (true) {
        Terms wy = mul_terms(fq, cut(w, cur), y, cur);
        Terms err;
        err.reserve(wy.size());
        for (const auto& [e, c] : wy) {
            if (e == 0) {
                FqElem d = fq.sub(fq.one(), c);
                if (!Fq::is_zero(d)) err.emplace_back(e, d);
            } else {
                err.emplace_back(e, fq.neg(c));
            }
        }
        if (wy.empty() || wy.front().first != 0) err.insert(err.begin(), {0, fq.one()});
        y = add_terms(fq, y, mul_terms(fq, y, err, cur), cur);
        if (cur >= rel) break;
        cur = (cur > rel / 2) ? rel : std::min(rel, 2 * cur);
    }
    Terms out;
    out.reserve(y.size());
    for (const auto& [e, c] : y) out.emplace_back(e - v0, fq.mul(c, c0inv));
    return PerfSeries(a.field_ptr(), std::move(out), rel - v0);
}

PerfSeries ps_div(const PerfSeries& a, const PerfSeries& b) { return ps_mul(a, ps_inv(b)); }

PerfSeries ps_pow(const PerfSeries& a, std::int64_t n) {
    if (n < 0) return ps_pow(ps_inv(a), -n);
    PerfSeries r = PerfSeries::one(a.field_ptr()), b = a;
    while (n > 0) {
        if (n & 1) r = ps_mul(r, b);
        n >>= 1;
        if (n) b = ps_mul(b, b);
    }
    return r;
}

PerfSeries ps_frobenius(const PerfSeries& a, int k) {
    if (k == 0) return a;
    const Fq& fq = a.field().fq;
    const std::int64_t p = a.field().p();
    Terms t;
    t.reserve(a.terms().size());
    std::int64_t prec = a.prec_scaled();
    if (k > 0) {
        const std::int64_t f = ipow(p, k);
        for (const auto& [e, c] : a.terms()) {
            std::int64_t ne;
            if (__builtin_mul_overflow(e, f, &ne)) throw PrecisionError("Frobenius exponent overflow");
            t.emplace_back(ne, fq.frobenius(c, k));
        }
        if (prec != kExact) {
            std::int64_t np;
            prec = __builtin_mul_overflow(prec, f, &np) ? kExact : np;
        }
    } else {
        const std::int64_t f = ipow(p, -k);
        for (const auto& [e, c] : a.terms()) {
            if (e % f != 0)
                throw PrecisionError("inverse Frobenius exceeds the denominator bound p^" +
                                     std::to_string(a.field().M));
            t.emplace_back(e / f, fq.frobenius(c, k));
        }
        if (prec != kExact) prec = floor_div(prec, f);
    }
    return PerfSeries(a.field_ptr(), std::move(t), prec);
}

NormExp ps_val(const PerfSeries& a) {
    NormExp n;
    n.scale = a.field().scale;
    if (!a.is_zero()) {
        n.kind = NegLog::Kind::Finite;
        n.v = a.from_scaled(a.terms().front().first);
    } else if (a.is_exact()) {
        n.kind = NegLog::Kind::Infinite;
    } else {
        n.kind = NegLog::Kind::AtLeast;
        n.v = a.from_scaled(a.prec_scaled());
    }
    return n;
}

bool ps_equal(const PerfSeries& a, const PerfSeries& b) {
    require_same(a, b);
    const std::int64_t prec = std::min(a.prec_scaled(), b.prec_scaled());
    return cut(a.terms(), prec) == cut(b.terms(), prec);
}

bool ps_identical(const PerfSeries& a, const PerfSeries& b) {
    return same_field(a.field_ptr(), b.field_ptr()) && a.prec_scaled() == b.prec_scaled() && a.terms() == b.terms();
}

PerfSeries ps_poly_eval(const PsPoly& P, const PerfSeries& y) {
    if (P.empty()) return PerfSeries::zero(y.field_ptr());
    PerfSeries acc = P.back();
    for (std::size_t i = P.size() - 1; i-- > 0;) acc = ps_add(ps_mul(acc, y), P[i]);
    return acc;
}

PsPoly ps_poly_derivative(const PsPoly& P) {
    PsPoly d;
    for (std::size_t i = 1; i < P.size(); ++i)
        d.push_back(ps_scale(P[i], P[i].field().fq.from_int(static_cast<std::int64_t>(i))));
    if (d.empty() && !P.empty()) d.push_back(PerfSeries::zero(P[0].field_ptr()));
    return d;
}

std::vector<NewtonSegment> newton_polygon(const PsPoly& P) {
    std::vector<std::pair<std::int64_t, Q>> pts;
    for (std::size_t i = 0; i < P.size(); ++i)
        if (!P[i].is_zero()) pts.emplace_back(static_cast<std::int64_t>(i), P[i].from_scaled(*P[i].val_scaled()));
    if (pts.empty()) throw PreconditionError("newton_polygon: all coefficients vanish");
    if (P.back().is_zero()) throw PreconditionError("newton_polygon: leading coefficient vanishes at precision");
    // Monotone chain, left to right; collinear middle points are dropped.
    std::vector<std::pair<std::int64_t, Q>> hull;
    for (const auto& pt : pts) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull.back();
            const Q s1 = (b.second - a.second) / Q(b.first - a.first);
            const Q s2 = (pt.second - a.second) / Q(pt.first - a.first);
            if (s2 <= s1) hull.pop_back();
            else break;
        }
        hull.push_back(pt);
    }
    std::vector<NewtonSegment> segs;
    for (std::size_t i = 1; i < hull.size(); ++i) {
        const std::int64_t len = hull[i].first - hull[i - 1].first;
        segs.push_back({(hull[i].second - hull[i - 1].second) / Q(len), static_cast<int>(len)});
    }
    return segs;
}

namespace {

FqElem fq_poly_eval(const Fq& fq, const std::vector<FqElem>& r, const FqElem& x) {
    FqElem acc{};
    for (std::size_t i = r.size(); i-- > 0;) acc = fq.add(fq.mul(acc, x), r[i]);
    return acc;
}

}  // namespace

PerfSeries ps_root(const PsPoly& P_in, const Q& want_val) {
    if (P_in.empty()) throw PreconditionError("ps_root: empty polynomial");
    const FieldPtr F = P_in[0].field_ptr();
    const Fq& fq = F->fq;
    PsPoly P = P_in;
    while (!P.empty() && P.back().is_zero()) P.pop_back();
    if (P.size() < 2) throw PreconditionError("ps_root: polynomial has no positive-degree term at precision");
    const auto segs = newton_polygon(P);
    if (std::none_of(segs.begin(), segs.end(), [&](const NewtonSegment& s) { return s.slope == -want_val; }))
        throw PreconditionError("ps_root: no Newton polygon segment of slope " + q_to_string(-want_val));
    const std::size_t d = P.size() - 1;

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < P.size(); ++i)
        if (!P[i].is_zero()) support.push_back(i);

    if (support.size() == 2 && support[0] == 0) {
        // a_d T^d + a_0 with d a power of p (including d = 1): exact solve.
        std::int64_t dd = static_cast<std::int64_t>(d);
        if (is_p_power(dd, F->p())) {
            const int k = dd == 1 ? 0 : p_valuation(dd, F->p());
            PerfSeries rhs = ps_neg(ps_div(P[0], P[d]));
            PerfSeries y = ps_frobenius(rhs, -k);
            if (y.is_zero() || y.from_scaled(*y.val_scaled()) != want_val)
                throw InternalError("ps_root: Frobenius solve produced wrong valuation");
            return y;
        }
    }

    // Shift T = u S so that the chosen segment becomes horizontal.
    const PerfSeries u = PerfSeries::monomial(F, want_val);
    PsPoly R(P.size(), PerfSeries::zero(F));
    PerfSeries upow = PerfSeries::one(F);
    std::int64_t mu = kExact;
    for (std::size_t i = 0; i < P.size(); ++i) {
        R[i] = ps_mul(P[i], upow);
        if (!R[i].is_zero()) mu = std::min(mu, *R[i].val_scaled());
        upow = ps_mul(upow, u);
    }
    const PerfSeries shift = PerfSeries::monomial(F, -Q(mu, F->S));
    std::vector<FqElem> residue(R.size());
    for (std::size_t i = 0; i < R.size(); ++i) {
        R[i] = ps_mul(R[i], shift);
        if (R[i].prec_scaled() <= 0) throw PrecisionError("ps_root: coefficient precision too small after slope shift");
        residue[i] = R[i].coeff_scaled(0);
    }
    std::vector<FqElem> dres;
    for (std::size_t i = 1; i < residue.size(); ++i)
        dres.push_back(fq.mul(residue[i], fq.from_int(static_cast<std::int64_t>(i))));

    const std::int64_t q = fq.order();
    if (q > 1'000'000) throw ParameterError("ps_root: residue field too large to enumerate");
    bool any_root = false;
    std::optional<FqElem> rho;
    for (std::int64_t idx = 1; idx < q && !rho; ++idx) {
        FqElem x = fq.from_index(idx);
        if (!Fq::is_zero(fq_poly_eval(fq, residue, x))) continue;
        any_root = true;
        if (!Fq::is_zero(fq_poly_eval(fq, dres, x))) rho = x;
    }
    if (!any_root) {
        std::ostringstream os;
        os << "ps_root: residue polynomial has no root in F_" << q << " (coefficients";
        for (const auto& c : residue) {
            os << " [";
            auto v = fq.to_vector(c);
            for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
            os << "]";
        }
        os << ")";
        throw UnsupportedResidueRootError(os.str());
    }
    if (!rho) throw DegenerateRootError("ps_root: every residue root is multiple");

    const PsPoly dR = ps_poly_derivative(R);
    PerfSeries s(F, {{0, *rho}}, q_floor(F->e_max * F->S));
    for (int it = 0; it < 64; ++it) {
        PerfSeries val = ps_poly_eval(R, s);
        if (val.is_zero()) break;
        PerfSeries step = ps_div(val, ps_poly_eval(dR, s));
        PerfSeries next = ps_sub(s, step);
        if (ps_identical(next, s)) break;
        s = next;
    }
    return ps_mul(u, s);
}

}  // namespace perfectoid
