#include "perfectoid/descent.hpp"

#include "perfectoid/errors.hpp"

#include <random>
#include <tuple>
#include <utility>

namespace perfectoid {

namespace {

NegLog neglog_min(const NegLog& a, const NegLog& b) {
    if (a.kind == NegLog::Kind::Infinite) return b;
    if (b.kind == NegLog::Kind::Infinite) return a;
    if (a.value < b.value) return a;
    if (b.value < a.value) return b;
    return a.kind == NegLog::Kind::Finite ? a : b;
}

void require_same_shape(const WMat& a, const WMat& b) {
    if (a.d != b.d) throw ParameterError("matrix size mismatch");
}

void require_same_shape(const AMat& a, const AMat& b) {
    if (a.d != b.d) throw ParameterError("matrix size mismatch");
}

WittVec level_element(const FieldPtr& F, int N, int n, const PerfSeries& y, bool with_one) {
    std::vector<PerfSeries> c(N, PerfSeries::zero(F));
    if (with_one) c[0] = PerfSeries::one(F);
    if (n < N) c[n] = with_one && n == 0 ? ps_add(c[0], y) : y;
    return WittVec(F, std::move(c));
}

}  // namespace

// ---------------------------------------------------------------- W matrices

WMat wm_identity(const FieldPtr& F, int N, int d) {
    WMat m{d, {}};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m.e.push_back(i == j ? WittVec::one(F, N) : WittVec::zero(F, N));
    return m;
}

WMat wm_zero(const FieldPtr& F, int N, int d) {
    WMat m{d, {}};
    for (int i = 0; i < d * d; ++i) m.e.push_back(WittVec::zero(F, N));
    return m;
}

WMat wm_add(const WMat& a, const WMat& b) {
    require_same_shape(a, b);
    WMat m{a.d, {}};
    for (std::size_t i = 0; i < a.e.size(); ++i) m.e.push_back(w_add(a.e[i], b.e[i]));
    return m;
}

WMat wm_sub(const WMat& a, const WMat& b) {
    require_same_shape(a, b);
    WMat m{a.d, {}};
    for (std::size_t i = 0; i < a.e.size(); ++i) m.e.push_back(w_sub(a.e[i], b.e[i]));
    return m;
}

WMat wm_mul(const WMat& a, const WMat& b) {
    require_same_shape(a, b);
    WMat m = wm_zero(a.field_ptr(), a.N(), a.d);
    for (int i = 0; i < a.d; ++i)
        for (int j = 0; j < a.d; ++j) {
            WittVec acc = WittVec::zero(a.field_ptr(), a.N());
            for (int k = 0; k < a.d; ++k) acc = w_add(acc, w_mul(a.at(i, k), b.at(k, j)));
            m.at(i, j) = acc;
        }
    return m;
}

WMat wm_inv(const WMat& a) {
    const int d = a.d;
    WMat m = a, inv = wm_identity(a.field_ptr(), a.N(), d);
    for (int col = 0; col < d; ++col) {
        int piv = -1;
        for (int r = col; r < d; ++r)
            if (m.at(r, col).is_unit()) {
                piv = r;
                break;
            }
        if (piv < 0) throw NonUnitError("wm_inv: matrix is not invertible at precision");
        if (piv != col)
            for (int j = 0; j < d; ++j) {
                std::swap(m.at(piv, j), m.at(col, j));
                std::swap(inv.at(piv, j), inv.at(col, j));
            }
        const WittVec s = w_inv(m.at(col, col));
        for (int j = 0; j < d; ++j) {
            m.at(col, j) = w_mul(m.at(col, j), s);
            inv.at(col, j) = w_mul(inv.at(col, j), s);
        }
        for (int r = 0; r < d; ++r) {
            if (r == col || m.at(r, col).is_zero()) continue;
            const WittVec f = m.at(r, col);
            for (int j = 0; j < d; ++j) {
                m.at(r, j) = w_sub(m.at(r, j), w_mul(f, m.at(col, j)));
                inv.at(r, j) = w_sub(inv.at(r, j), w_mul(f, inv.at(col, j)));
            }
        }
    }
    return inv;
}

WMat wm_frobenius(const WMat& a, int k) {
    WMat m{a.d, {}};
    for (const auto& x : a.e) m.e.push_back(w_frobenius(x, k));
    return m;
}

WMat wm_gamma(const WMat& a, const GammaElt& g) {
    WMat m{a.d, {}};
    for (const auto& x : a.e) m.e.push_back(w_gamma(x, g));
    return m;
}

bool wm_is_zero(const WMat& a) {
    for (const auto& x : a.e)
        if (!x.is_zero()) return false;
    return true;
}

bool wm_equal(const WMat& a, const WMat& b) {
    if (a.d != b.d) return false;
    for (std::size_t i = 0; i < a.e.size(); ++i)
        if (!w_equal(a.e[i], b.e[i])) return false;
    return true;
}

bool wm_is_one_mod_p(const WMat& a) {
    const PerfSeries one = PerfSeries::one(a.field_ptr());
    for (int i = 0; i < a.d; ++i)
        for (int j = 0; j < a.d; ++j) {
            const PerfSeries& c = a.at(i, j).coord(0);
            if (i == j ? !ps_sub(c, one).is_zero() : !c.is_zero()) return false;
        }
    return true;
}

NegLog wm_gauss_norm(const WMat& a, const Q& r) {
    NegLog out = NegLog::infinite();
    for (const auto& x : a.e) out = neglog_min(out, gauss_norm(x, r));
    return out;
}

NegLog wm_coeff_sup_norm(const WMat& a) {
    NegLog out = NegLog::infinite();
    for (const auto& x : a.e) out = neglog_min(out, coeff_sup_norm(x));
    return out;
}

// ---------------------------------------------------------------- A matrices

AMat am_identity(std::int64_t p, int N, int d) {
    AMat m{d, {}};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m.e.push_back(i == j ? ASeries::one(p, N) : ASeries::zero(p, N));
    return m;
}

AMat am_add(const AMat& a, const AMat& b) {
    require_same_shape(a, b);
    AMat m{a.d, {}};
    for (std::size_t i = 0; i < a.e.size(); ++i) m.e.push_back(a_add(a.e[i], b.e[i]));
    return m;
}

AMat am_sub(const AMat& a, const AMat& b) {
    require_same_shape(a, b);
    AMat m{a.d, {}};
    for (std::size_t i = 0; i < a.e.size(); ++i) m.e.push_back(a_sub(a.e[i], b.e[i]));
    return m;
}

AMat am_mul(const AMat& a, const AMat& b) {
    require_same_shape(a, b);
    const std::int64_t p = a.e.front().p();
    const int N = a.e.front().N();
    AMat m{a.d, {}};
    for (int i = 0; i < a.d; ++i)
        for (int j = 0; j < a.d; ++j) {
            ASeries acc = ASeries::zero(p, N);
            for (int k = 0; k < a.d; ++k) acc = a_add(acc, a_mul(a.at(i, k), b.at(k, j)));
            m.e.push_back(acc);
        }
    return m;
}

AMat am_phi(const AMat& a) {
    AMat m{a.d, {}};
    for (const auto& x : a.e) m.e.push_back(a_phi(x));
    return m;
}

AMat am_gamma(const AMat& a, const GammaElt& g, std::optional<std::int64_t> top) {
    AMat m{a.d, {}};
    for (const auto& x : a.e) m.e.push_back(a_gamma(x, g, top));
    return m;
}

AMat am_inv_one_mod_p(const AMat& a) {
    const std::int64_t p = a.e.front().p();
    const int N = a.e.front().N();
    const AMat I = am_identity(p, N, a.d);
    const AMat X = am_sub(a, I);
    for (const auto& x : X.e)
        for (const auto& [n, c] : x.coeffs())
            if (c % p != 0) throw ParameterError("am_inv_one_mod_p: matrix is not 1 mod p");
    AMat negX{X.d, {}};
    for (const auto& x : X.e) negX.e.push_back(a_neg(x));
    AMat acc = I, term = I;
    for (int k = 1; k < N; ++k) {
        term = am_mul(term, negX);
        acc = am_add(acc, term);
    }
    return acc;
}

WMat embed_amat(const AMat& a, const FieldPtr& F) {
    WMat m{a.d, {}};
    for (const auto& x : a.e) m.e.push_back(embed_a_to_w(x, F));
    return m;
}

NegLog am_gauss_norm(const AMat& a, const Q& r, const Q& scale) {
    NegLog out = NegLog::infinite();
    for (const auto& x : a.e) out = neglog_min(out, a_gauss_norm(x, r, scale));
    return out;
}

// ---------------------------------------------------------------- modules

ValidationReport pgm_check(const PhiGammaModule& M) {
    ValidationReport rep;
    if (M.A.d != M.G.d || M.A.d < 1) {
        rep.failures.push_back("shape: A and G must be square of the same size");
        return rep;
    }
    try {
        (void)wm_inv(M.A);
        rep.etale = true;
    } catch (const NonUnitError&) {
        rep.failures.push_back("etale: A is not invertible at precision");
    }
    const WMat R = wm_sub(wm_mul(M.A, wm_frobenius(M.G, 1)), wm_mul(M.G, wm_gamma(M.A, M.gamma)));
    rep.commutation_residual = wm_gauss_norm(R, Q(1));
    rep.commutes = wm_is_zero(R);
    if (!rep.commutes)
        rep.failures.push_back("commutation: A phi(G) - G gamma(A) has -log_p norm " +
                               rep.commutation_residual.to_string());
    if (M.A_a && !wm_equal(embed_amat(*M.A_a, M.field_ptr()), M.A)) {
        rep.layer_consistent = false;
        rep.failures.push_back("layer: A differs from its A-layer representative");
    }
    if (M.G_a && !wm_equal(embed_amat(*M.G_a, M.field_ptr()), M.G)) {
        rep.layer_consistent = false;
        rep.failures.push_back("layer: G differs from its A-layer representative");
    }
    return rep;
}

const PhiGammaModule& pgm_validate(const PhiGammaModule& M) {
    const ValidationReport rep = pgm_check(M);
    if (!rep.ok()) {
        std::string msg = "invalid module:";
        for (const auto& f : rep.failures) msg += " [" + f + "]";
        throw PreconditionError(msg);
    }
    return M;
}

PhiGammaModule change_basis(const PhiGammaModule& M, const WMat& U) {
    if (U.d != M.d()) throw ParameterError("change_basis: size mismatch");
    const WMat Ui = wm_inv(U);
    return PhiGammaModule{Layer::W, M.gamma, wm_mul(wm_mul(Ui, M.A), wm_frobenius(U, 1)),
                          wm_mul(wm_mul(Ui, M.G), wm_gamma(U, M.gamma)), std::nullopt, std::nullopt};
}

// ---------------------------------------------------------------- good basis

GoodBasisResult good_basis(const WMat& F, int frobenius_power) {
    if (frobenius_power < 1) throw ParameterError("good_basis: Frobenius power must be positive");
    if (!wm_is_one_mod_p(F)) throw PreconditionError("good_basis: F is not 1 mod p");
    const FieldPtr& K = F.field_ptr();
    const int N = F.N(), d = F.d;
    const std::int64_t p = K->p();
    const WMat I = wm_identity(K, N, d);
    GoodBasisResult out{I, F, {}, NegLog::infinite(), false, false};
    WMat Fn = F, Gn = I;
    for (int n = 1; n < N; ++n) {
        const WMat D = wm_sub(Fn, Gn);
        std::optional<Q> v;
        for (const auto& x : D.e) {
            for (int k = 0; k < n; ++k)
                if (!x.coord(k).is_zero()) throw InternalError("good_basis: F_n - G_n is not 0 mod p^n");
            const PerfSeries& c = x.coord(n);
            if (!c.is_zero()) {
                const Q cv = c.from_scaled(*c.val_scaled());
                if (!v || cv < *v) v = cv;
            }
        }
        GoodBasisStep step{n, 0, v ? NegLog::finite(*v * K->scale) : NegLog::infinite()};
        if (!v) {
            out.steps.push_back(step);
            continue;
        }
        const Q target = Q(-n, 2);
        while (*v * K->scale / Q(ipow(p, step.m * frobenius_power)) <= target) {
            ++step.m;
            if (step.m * frobenius_power > K->M)
                throw PrecisionError("good_basis: inverse Frobenius exceeds the denominator bound p^" +
                                     std::to_string(K->M));
        }
        out.steps.push_back(step);
        WMat Un{d, {}};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const PerfSeries& X = D.at(i, j).coord(n);
                PerfSeries Y = PerfSeries::zero(K);
                for (int h = 1; h <= step.m; ++h) Y = ps_sub(Y, ps_frobenius(X, -h * frobenius_power));
                Un.e.push_back(level_element(K, N, n, Y, i == j));
                Gn.at(i, j) = w_add(Gn.at(i, j), level_element(K, N, n, ps_frobenius(X, -step.m * frobenius_power), false));
            }
        if (step.m > 0) {
            Fn = wm_mul(wm_mul(wm_inv(Un), Fn), wm_frobenius(Un, frobenius_power));
            out.U = wm_mul(out.U, Un);
        }
    }
    out.G_limit = Fn;
    const bool limit_ok = wm_equal(Fn, Gn);
    out.norm = wm_gauss_norm(wm_sub(out.G_limit, I), Q(1));
    out.unit_mod_p = wm_is_one_mod_p(out.U);
    out.certified = limit_ok && (out.norm.kind == NegLog::Kind::Infinite || out.norm.value > Q(0));
    return out;
}

// ---------------------------------------------------------------- overconvergent descent

std::optional<ASeries> to_a_layer(const WittVec& x, const GammaElt& g) {
    const SplitResult s = split_lift(x, g);
    if (!s.certified || !s.z_w.is_zero()) return std::nullopt;
    return s.y;
}

namespace {

struct MatSplit {
    AMat y;
    WMat y_w;  // embedded A-part
    WMat z;    // embedded T-part
    bool z_zero = true;
};

MatSplit split_matrix(const WMat& x, const GammaElt& g) {
    MatSplit out{AMat{x.d, {}}, WMat{x.d, {}}, WMat{x.d, {}}, true};
    for (const auto& w : x.e) {
        const SplitResult s = split_lift(w, g);
        if (!s.certified) throw InternalError("cc_descent: splitting failed to certify");
        out.y.e.push_back(s.y);
        out.y_w.e.push_back(s.y_w);
        out.z.e.push_back(s.z_w);
        if (!s.z_w.is_zero()) out.z_zero = false;
    }
    return out;
}

}  // namespace

DescentReport cc_descent(const PhiGammaModule& M, const DescentOptions& opt) {
    const FieldPtr& F = M.field_ptr();
    const int N = M.N(), d = M.d();
    const GammaElt& g = M.gamma;
    const WMat I = wm_identity(F, N, d);
    if (!wm_is_one_mod_p(M.A) || !wm_is_one_mod_p(M.G))
        throw PreconditionError("cc_descent: A and G must be 1 mod p");
    const int cap = opt.max_iterations > 0 ? opt.max_iterations : 8 * N;

    DescentReport rep;
    const WMat GM1 = wm_sub(M.G, I);
    MatSplit sp = split_matrix(GM1, g);

    WMat U = I, Gl = M.G, Y = sp.z, Xw = sp.y_w;
    AMat X = sp.y;
    std::vector<std::pair<WMat, WMat>> iterates;  // (X_l, Y_l)
    for (int l = 0;; ++l) {
        iterates.emplace_back(Xw, Y);
        if (wm_is_zero(Y)) break;
        if (l >= cap) throw NonConvergenceError("cc_descent: iteration cap reached");
        const WMat OneMinusY = wm_sub(I, Y);
        WMat inv = I, pw = I;
        for (int k = 1; k < N; ++k) {
            pw = wm_mul(pw, Y);
            inv = wm_add(inv, pw);
        }
        U = wm_mul(U, OneMinusY);
        Gl = wm_mul(wm_mul(inv, Gl), wm_gamma(OneMinusY, g));
        const MatSplit s = split_matrix(wm_sub(wm_sub(Gl, I), Xw), g);
        X = am_add(X, s.y);
        Xw = wm_add(Xw, s.y_w);
        Y = s.z;
        rep.iterations = l + 1;
    }

    // Radius: the largest grid point with eps beyond the splitting loss at which
    // the iterates follow the schedule; otherwise the largest admissible one.
    const auto schedule_at = [&](const Q& r, const Q& e) {
        std::vector<DescentStep> trace;
        bool ok = true;
        for (std::size_t l = 0; l < iterates.size(); ++l) {
            DescentStep st{static_cast<int>(l), wm_gauss_norm(iterates[l].first, r),
                           wm_gauss_norm(iterates[l].second, r), false, false};
            st.x_ok = st.x_norm.certifies(2 * e);
            st.y_ok = st.y_norm.certifies(Q(static_cast<std::int64_t>(l) + 2) * e);
            ok = ok && st.x_ok && st.y_ok;
            trace.push_back(st);
        }
        return std::make_pair(ok, trace);
    };
    bool admissible = false;
    if (wm_is_zero(GM1)) {
        rep.r = Q(1, 2);
        std::tie(rep.schedule_ok, rep.trace) = schedule_at(rep.r, Q(0));
        admissible = true;
    }
    for (int k = 1; k <= opt.max_grid_exponent && !rep.schedule_ok; ++k) {
        const Q r(1, ipow(2, k));
        const NegLog nu = wm_gauss_norm(GM1, r);
        const NegLog nsplit = neglog_min(wm_gauss_norm(sp.y_w, r), wm_gauss_norm(sp.z, r));
        const Q kappa = nsplit.kind == NegLog::Kind::Infinite ? Q(0) : std::max(Q(0), nu.value - nsplit.value);
        const Q e = nu.value / 3;
        if (!(e > kappa && e > Q(0))) continue;
        auto [ok, trace] = schedule_at(r, e);
        if (!admissible || ok) {
            rep.r = r;
            rep.kappa = kappa;
            rep.eps_exponent = e;
            rep.schedule_ok = ok;
            rep.trace = std::move(trace);
            admissible = true;
        }
    }
    if (!admissible) throw PreconditionError("cc_descent: no admissible radius on the grid");

    const WMat Ui = wm_inv(U);
    rep.U = U;
    rep.H = wm_mul(wm_mul(Ui, M.G), wm_gamma(U, g));
    rep.H_a = am_add(am_identity(F->p(), N, d), X);
    rep.h_in_a_layer = wm_equal(rep.H, wm_add(I, Xw)) && wm_equal(rep.H, embed_amat(*rep.H_a, F));
    rep.A_new = wm_mul(wm_mul(Ui, M.A), wm_frobenius(U, 1));
    const MatSplit as = split_matrix(rep.A_new, g);
    rep.c_zero = as.z_zero;
    rep.A_a = as.y;
    rep.commutation_zero =
        wm_is_zero(wm_sub(wm_mul(rep.A_new, wm_frobenius(rep.H, 1)), wm_mul(rep.H, wm_gamma(rep.A_new, g))));
    const WMat A_back = wm_mul(wm_mul(U, rep.A_new), wm_frobenius(Ui, 1));
    const WMat G_back = wm_mul(wm_mul(U, rep.H), wm_gamma(Ui, g));
    rep.base_extension_ok = wm_equal(A_back, M.A) && wm_equal(G_back, M.G);
    return rep;
}

// ---------------------------------------------------------------- test modules

GaugedModule random_gauge_module(std::uint64_t seed, const GaugeParams& P) {
    if (P.d < 1 || P.d > 2) throw ParameterError("random_gauge_module: d must be 1 or 2");
    if (P.N < 2) throw ParameterError("random_gauge_module: N must be at least 2");
    if (P.v_denominator < 0 || P.v_denominator > P.M) throw ParameterError("random_gauge_module: bad denominator");
    std::mt19937_64 rng(seed);
    const FieldPtr F = make_field(P.p, P.scale, P.M, P.e_max);
    const GammaElt g = GammaElt::parse(P.p, P.gamma);
    const std::int64_t p = P.p;
    const int N = P.N, d = P.d;
    const std::int64_t small = ipow(p, N - 1);
    std::uniform_int_distribution<std::int64_t> dc(0, small - 1);
    const auto pc = [&](std::int64_t c) { return ASeries::constant(p, N, p * c); };

    AMat C = am_identity(p, N, d), D = am_identity(p, N, d);
    const std::int64_t a = dc(rng), b = dc(rng), s = dc(rng);
    C.at(0, 0) = a_add(C.at(0, 0), pc(a));
    if (d == 1) {
        D.at(0, 0) = a_add(D.at(0, 0), pc(b));
    } else {
        C.at(1, 1) = a_add(C.at(1, 1), pc(a));
        C.at(0, 1) = pc(b);
        D.at(0, 1) = pc(s == 0 ? 1 : s);
    }

    AMat W = am_identity(p, N, d);
    for (auto& w : W.e) {
        std::map<std::int64_t, std::int64_t> c;
        for (int k = 0; k <= P.a_degree; ++k) c[k] = p * dc(rng);
        w = a_add(w, ASeries(p, N, std::move(c)));
    }
    const AMat Wi = am_inv_one_mod_p(W);
    const std::optional<std::int64_t> top = g.exact() ? std::nullopt : std::optional<std::int64_t>(64);
    const AMat A0 = am_mul(am_mul(Wi, C), am_phi(W));
    const AMat G0 = am_mul(am_mul(Wi, D), am_gamma(W, g, top));
    PhiGammaModule base{Layer::A, g, embed_amat(A0, F), embed_amat(G0, F), A0, G0};

    WMat V = wm_identity(F, N, d);
    if (!P.trivial_secret) {
        const std::int64_t step = F->S / ipow(p, P.v_denominator);
        std::uniform_int_distribution<std::int64_t> de(0, 2 * ipow(p, P.v_denominator) - 1);
        std::uniform_int_distribution<std::int64_t> dv(1, p - 1);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                std::vector<PerfSeries> coords(N, PerfSeries::zero(F));
                if (i == j) coords[0] = PerfSeries::one(F);
                for (int n = 1; n < N; ++n) {
                    std::map<std::int64_t, std::int64_t> terms;
                    for (int k = 0; k < P.v_terms; ++k) terms[de(rng) * step] = dv(rng);
                    std::vector<PerfSeries::Term> t;
                    for (const auto& [E, c] : terms) t.emplace_back(E, F->fq.from_int(c));
                    coords[n] = PerfSeries(F, std::move(t), kExact);
                }
                V.at(i, j) = WittVec(F, std::move(coords));
            }
    }
    PhiGammaModule hidden = P.trivial_secret ? base : change_basis(base, V);
    return GaugedModule{std::move(hidden), std::move(base), std::move(V), std::move(W), std::move(C), std::move(D)};
}

}  // namespace perfectoid
