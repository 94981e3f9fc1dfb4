#include "perfectoid/tilting.hpp"

#include "perfectoid/errors.hpp"

#include <algorithm>

namespace perfectoid {

std::string to_string(PrimitiveKind k) {
    switch (k) {
        case PrimitiveKind::Cyclotomic: return "cyclotomic";
        case PrimitiveKind::Kummer: return "kummer";
        case PrimitiveKind::Custom: return "custom";
    }
    return "custom";
}

PrimitiveKind primitive_kind_from_string(const std::string& s) {
    if (s == "cyclotomic") return PrimitiveKind::Cyclotomic;
    if (s == "kummer") return PrimitiveKind::Kummer;
    if (s == "custom") return PrimitiveKind::Custom;
    throw ParameterError("unknown primitive preset: " + s);
}

namespace {

// Smallest T with p^n ([a+b] - [a]) in I_N whenever c v(b) >= T, for level n.
std::int64_t level_threshold(std::int64_t p, int N, int n) {
    std::int64_t best = 0;
    for (int k = 0; k < N - n; ++k) best = std::max(best, ipow(p, k) * (N - n - k));
    return best;
}

Q neglog_of(const PerfSeries& a) { return a.field().scale * a.from_scaled(*a.val_scaled()); }

void require_integral(const WittVec& x) {
    for (const auto& c : x.coords())
        if (!c.is_zero() && *c.val_scaled() < 0)
            throw PreconditionError("tilting: coordinate outside the valuation ring");
}

WittVec shift_down(const WittVec& x) {
    std::vector<PerfSeries> c(x.N(), PerfSeries::zero(x.field_ptr()));
    for (int n = 1; n < x.N(); ++n) c[n - 1] = x.coord(n);
    return WittVec(x.field_ptr(), std::move(c));
}

bool below(const NegLog& v, const Q& bound) { return !v.certifies(bound); }

}  // namespace

WittVec tilt_truncate(const WittVec& x, const Primitive& z) {
    if (!same_field(x.field_ptr(), z.field_ptr()) || x.N() != z.N())
        throw ParameterError("tilting: element and primitive live over different rings");
    std::vector<PerfSeries> c;
    for (int n = 0; n < x.N(); ++n) {
        const PerfSeries& a = x.coord(n);
        const std::int64_t cut = z.cutoffs[n];
        std::vector<PerfSeries::Term> t;
        for (const auto& term : a.terms()) {
            if (term.first >= cut) break;
            t.push_back(term);
        }
        const std::int64_t prec = a.prec_scaled() >= cut ? kExact : a.prec_scaled();
        c.emplace_back(x.field_ptr(), std::move(t), prec);
    }
    return WittVec(x.field_ptr(), std::move(c));
}

PrimitivePtr primitive_check(const WittVec& z, PrimitiveKind kind) {
    if (z.N() < 2) throw NotPrimitiveError("primitive check needs at least two coordinates");
    require_integral(z);
    const PerfSeries& z0 = z.coord(0);
    if (z0.is_zero()) throw NotPrimitiveError("leading coordinate vanishes");
    if (neglog_of(z0) != Q(1))
        throw NotPrimitiveError("leading coordinate has -log_p norm " + q_to_string(neglog_of(z0)) + ", expected 1/1");
    const PerfSeries& z1bar = z.coord(1);
    if (z1bar.is_zero() || *z1bar.val_scaled() != 0)
        throw NotPrimitiveError("second coordinate is not a unit of the valuation ring");

    auto prim = std::make_shared<Primitive>(Primitive{z, z, z, kind, {}});
    const std::int64_t p = z.field().p();
    for (int n = 0; n < z.N(); ++n)
        prim->cutoffs.push_back(q_ceil(Q(level_threshold(p, z.N(), n)) * z.field().S / z.field().scale));
    const WittVec diff = w_sub(z, WittVec::teichmuller(z0, z.N()));
    if (!diff.coord(0).is_exact_zero()) throw InternalError("primitive check: z - [z0] has a leading coordinate");
    prim->z1 = shift_down(diff);
    if (!prim->z1.is_unit() || *prim->z1.coord(0).val_scaled() != 0)
        throw NotPrimitiveError("(z - [z0]) / p is not a unit");
    prim->z1_inv = tilt_truncate(w_inv(prim->z1), *prim);
    return prim;
}

FieldPtr tilting_field(PrimitiveKind kind, std::int64_t p, int N, int f, const std::vector<std::int64_t>& modulus) {
    const Q scale = kind == PrimitiveKind::Kummer ? kummer_scale() : cyclotomic_scale(p);
    Q top = Q(level_threshold(p, N, 0)) / scale;
    Fq fq = f == 1 && modulus.empty() ? Fq::prime_field(p) : Fq(p, f, modulus);
    return make_field(fq, scale, 2 * N + 2, Q(q_ceil(top) + 4));
}

PrimitivePtr preset_primitive(PrimitiveKind kind, std::int64_t p, int N, FieldPtr F) {
    if (!F) F = tilting_field(kind, p, N);
    const PerfSeries t = PerfSeries::monomial(F, Q(1));
    WittVec z = WittVec::zero(F, N);
    if (kind == PrimitiveKind::Kummer) {
        if (F->scale != kummer_scale()) throw ParameterError("kummer preset needs norm scale 1");
        z = w_sub(WittVec::from_int(F, N, p), WittVec::teichmuller(t, N));
    } else if (kind == PrimitiveKind::Cyclotomic) {
        if (F->scale != cyclotomic_scale(p)) throw ParameterError("cyclotomic preset needs norm scale p/(p-1)");
        const PerfSeries root = ps_frobenius(ps_add(PerfSeries::one(F), t), -1);
        PerfSeries power = PerfSeries::one(F);
        for (std::int64_t i = 0; i < p; ++i) {
            z = w_add(z, WittVec::teichmuller(power, N));
            power = ps_mul(power, root);
        }
    } else {
        throw ParameterError("preset_primitive: choose cyclotomic or kummer");
    }
    return primitive_check(z, kind);
}

bool is_stable(const WittVec& x) {
    const PerfSeries& x0 = x.coord(0);
    if (x0.is_zero()) {
        for (const auto& c : x.coords())
            if (!c.is_zero()) return false;
        return true;
    }
    const std::int64_t v0 = *x0.val_scaled();
    for (int n = 1; n < x.N(); ++n)
        if (x.coord(n).effective_val_scaled() < v0) return false;
    return true;
}

StableResult stable_reduce_traced(const WittVec& x_in, const Primitive& z) {
    require_integral(x_in);
    WittVec x = tilt_truncate(x_in, z);
    const int N = z.N();
    const WittVec tz0 = WittVec::teichmuller(z.z0(), N);
    for (int pass = 0; pass <= 4 * N; ++pass) {
        if (!below(gauss_norm(x, Q(1)), Q(N))) return {WittVec::zero(x.field_ptr(), N), pass};
        if (is_stable(x)) return {x, pass};
        const WittVec rest = shift_down(x);
        const WittVec lead = WittVec::teichmuller(x.coord(0), N);
        x = tilt_truncate(w_sub(lead, w_mul(tz0, w_mul(rest, z.z1_inv))), z);
    }
    throw NonConvergenceError("stable_reduce: iteration cap " + std::to_string(4 * N) + " exceeded");
}

WittVec stable_reduce(const WittVec& x, const Primitive& z) { return stable_reduce_traced(x, z).rep; }

struct UntiltAccess {
    static UntiltElt raw(PrimitivePtr mod, WittVec rep) { return UntiltElt(std::move(mod), std::move(rep), UntiltElt::Raw{}); }
};

UntiltElt::UntiltElt(PrimitivePtr mod, const WittVec& x) : mod_(std::move(mod)), rep_(stable_reduce(x, *mod_)) {}

UntiltElt::UntiltElt(PrimitivePtr mod, WittVec rep, Raw) : mod_(std::move(mod)), rep_(std::move(rep)) {}

UntiltElt UntiltElt::zero(PrimitivePtr mod) {
    auto F = mod->field_ptr();
    const int N = mod->N();
    return UntiltAccess::raw(std::move(mod), WittVec::zero(F, N));
}

UntiltElt UntiltElt::one(PrimitivePtr mod) {
    auto F = mod->field_ptr();
    const int N = mod->N();
    return UntiltAccess::raw(std::move(mod), WittVec::one(F, N));
}

UntiltElt UntiltElt::from_int(PrimitivePtr mod, std::int64_t k) {
    auto F = mod->field_ptr();
    const int N = mod->N();
    return UntiltElt(std::move(mod), WittVec::from_int(F, N, k));
}

UntiltElt UntiltElt::teichmuller(PrimitivePtr mod, const PerfSeries& a) {
    const int N = mod->N();
    return UntiltElt(std::move(mod), WittVec::teichmuller(a, N));
}

bool UntiltElt::is_zero() const { return !below(untilt_norm(*this), Q(mod_->N())); }

namespace {

void require_same(const UntiltElt& a, const UntiltElt& b) {
    if (a.modulus() != b.modulus() &&
        !(w_identical(a.modulus()->z, b.modulus()->z) && a.modulus()->kind == b.modulus()->kind))
        throw ParameterError("untilt: elements have different moduli");
}

}  // namespace

UntiltElt untilt_add(const UntiltElt& a, const UntiltElt& b) {
    require_same(a, b);
    return UntiltElt(a.modulus(), w_add(a.rep(), b.rep()));
}

UntiltElt untilt_neg(const UntiltElt& a) { return UntiltElt(a.modulus(), w_neg(a.rep())); }

UntiltElt untilt_sub(const UntiltElt& a, const UntiltElt& b) {
    require_same(a, b);
    return UntiltElt(a.modulus(), w_sub(a.rep(), b.rep()));
}

UntiltElt untilt_mul(const UntiltElt& a, const UntiltElt& b) {
    require_same(a, b);
    return UntiltElt(a.modulus(), w_mul(a.rep(), b.rep()));
}

UntiltElt untilt_pow(const UntiltElt& a, std::int64_t n) {
    if (n < 0) return untilt_pow(untilt_inv(a), -n);
    UntiltElt r = UntiltElt::one(a.modulus()), b = a;
    while (n > 0) {
        if (n & 1) r = untilt_mul(r, b);
        n >>= 1;
        if (n) b = untilt_mul(b, b);
    }
    return r;
}

UntiltElt untilt_inv(const UntiltElt& a) {
    const NegLog v = untilt_norm(a);
    if (!v.is_finite()) throw DivisionByZeroError("untilt_inv: class is zero at working precision");
    if (v.value != Q(0)) throw NonUnitError("untilt_inv: class is not a unit of the valuation ring");
    return UntiltElt(a.modulus(), w_inv(a.rep()));
}

namespace {

// Stable x = [x0] * unit; returns the unit x / [x0].
WittVec unit_part(const WittVec& x) {
    const PerfSeries inv0 = ps_inv(x.coord(0));
    std::vector<PerfSeries> c;
    for (const auto& a : x.coords()) c.push_back(a.is_exact_zero() ? a : ps_mul(a, inv0));
    return WittVec(x.field_ptr(), std::move(c));
}

}  // namespace

UntiltElt untilt_div(const UntiltElt& a, const UntiltElt& b) {
    require_same(a, b);
    const NegLog nb = untilt_norm(b);
    if (!nb.is_finite()) throw DivisionByZeroError("untilt_div: divisor is zero at working precision");
    const NegLog na = untilt_norm(a);
    if (!na.is_finite()) return UntiltElt::zero(a.modulus());
    if (na.value < nb.value) throw PreconditionError("untilt_div: quotient is not integral");
    const int N = a.modulus()->N();
    const PerfSeries lead = ps_div(a.rep().coord(0), b.rep().coord(0));
    const WittVec q = w_mul(WittVec::teichmuller(lead, N), w_mul(unit_part(a.rep()), w_inv(unit_part(b.rep()))));
    return UntiltElt(a.modulus(), q);
}

bool untilt_equal(const UntiltElt& a, const UntiltElt& b) { return untilt_sub(a, b).is_zero(); }

NegLog untilt_norm(const UntiltElt& a) {
    const int N = a.modulus()->N();
    const PerfSeries& x0 = a.rep().coord(0);
    if (x0.is_zero()) {
        if (x0.is_exact()) return NegLog::at_least(Q(N));
        return NegLog::at_least(std::min(Q(N), x0.field().scale * x0.from_scaled(x0.prec_scaled())));
    }
    const Q v = neglog_of(x0);
    if (v >= N) return NegLog::at_least(Q(N));
    return NegLog::finite(v);
}

PerfSeries untilt_residue(const UntiltElt& a) {
    const PerfSeries& x0 = a.rep().coord(0);
    const Field& F = x0.field();
    const std::int64_t cut = q_ceil(F.S / F.scale);
    std::vector<PerfSeries::Term> t;
    for (const auto& term : x0.terms()) {
        if (term.first >= cut) break;
        t.push_back(term);
    }
    if (x0.prec_scaled() < cut) throw PrecisionError("untilt_residue: leading coordinate known only below c v = 1");
    return PerfSeries(a.rep().field_ptr(), std::move(t), kExact);
}

UntiltElt untilt_poly_eval(const std::vector<UntiltElt>& P, const UntiltElt& x) {
    if (P.empty()) return UntiltElt::zero(x.modulus());
    UntiltElt acc = P.back();
    for (std::size_t i = P.size() - 1; i-- > 0;) acc = untilt_add(untilt_mul(acc, x), P[i]);
    return acc;
}

RootResult untilt_root(const std::vector<UntiltElt>& P, int steps) {
    if (P.size() < 2) throw PreconditionError("untilt_root: polynomial of degree at least one required");
    const PrimitivePtr mod = P[0].modulus();
    if (!untilt_equal(P.back(), UntiltElt::one(mod))) throw PreconditionError("untilt_root: polynomial must be monic");
    if (steps < 0) throw ParameterError("untilt_root: negative step count");
    const int d = static_cast<int>(P.size()) - 1;
    const int N = mod->N();
    const FieldPtr F = mod->field_ptr();
    const Q c = F->scale;

    RootResult res{UntiltElt::zero(mod), {}, NegLog::infinite(), false};
    for (int n = 0; n < steps; ++n) {
        // Taylor shift Q(T) = P(T + x_n).
        std::vector<UntiltElt> pw{UntiltElt::one(mod)};
        for (int k = 1; k <= d; ++k) pw.push_back(untilt_mul(pw.back(), res.root));
        std::vector<UntiltElt> Qc;
        for (int i = 0; i <= d; ++i) {
            UntiltElt acc = UntiltElt::zero(mod);
            std::int64_t binom = 1;
            for (int k = i; k <= d; ++k) {
                acc = untilt_add(acc, untilt_mul(untilt_mul(P[k], pw[k - i]), UntiltElt::from_int(mod, binom)));
                binom = binom * (k + 1) / (k + 1 - i);
            }
            Qc.push_back(acc);
        }
        RootStep step;
        step.residual = untilt_norm(Qc[0]);
        if (!step.residual.is_finite()) {
            res.exact = true;
            step.certified = true;
            res.steps.push_back(std::move(step));
            break;
        }
        const Q a0 = step.residual.value;
        if (a0 >= Q(steps)) {
            step.certified = true;
            res.steps.push_back(std::move(step));
            break;
        }
        if (a0 > Q(N - 1)) throw PrecisionError("untilt_root: residual below the precision needed for another step");
        std::optional<Q> lambda;
        for (int j = 1; j <= d; ++j) {
            const NegLog aj = untilt_norm(Qc[j]);
            if (!aj.is_finite()) continue;
            const Q cand = (a0 - aj.value) / Q(j);
            if (!lambda || cand > *lambda) lambda = cand;
        }
        if (!lambda) throw InternalError("untilt_root: monic polynomial lost its leading coefficient");
        const PerfSeries uval = PerfSeries::monomial(F, *lambda / c);
        const UntiltElt u = UntiltElt::teichmuller(mod, uval);
        PsPoly R{PerfSeries::one(F)};
        UntiltElt upow = UntiltElt::one(mod);
        for (int i = 1; i <= d; ++i) {
            upow = untilt_mul(upow, u);
            const UntiltElt num = untilt_mul(Qc[i], upow);
            R.push_back(untilt_residue(untilt_div(num, Qc[0])));
        }
        step.residue_poly = R;
        const PerfSeries y = ps_root(R, Q(0));
        const UntiltElt next = untilt_add(res.root, untilt_mul(u, UntiltElt::teichmuller(mod, y)));
        step.step_neglog = *lambda;
        res.root = next;
        const NegLog after = untilt_norm(untilt_poly_eval(P, res.root));
        step.certified = !below(after, Q(n + 1)) && *lambda >= Q(n, d);
        res.steps.push_back(std::move(step));
    }
    res.final_residual = untilt_norm(untilt_poly_eval(P, res.root));
    res.exact = res.exact || !res.final_residual.is_finite();
    return res;
}

}  // namespace perfectoid
