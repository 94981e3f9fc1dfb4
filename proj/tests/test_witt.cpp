#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

#include "perfectoid/errors.hpp"
#include "perfectoid/symstrict.hpp"

#include <chrono>

using namespace perfectoid;
using namespace testsupport;

namespace {

FieldPtr field(std::int64_t p, Q scale = Q(1), int M = 4, Q e_max = Q(24)) { return make_field(p, scale, M, e_max); }

PerfSeries mono(const FieldPtr& F, Q e, std::int64_t c = 1) {
    return PerfSeries::monomial(F, e, F->fq.from_int(c));
}

WittVec W(const FieldPtr& F, std::vector<PerfSeries> c) { return WittVec(F, std::move(c)); }

std::optional<Q> lower(const NegLog& v) { return v.lower(); }

Q min_val(const WittVec& x) {
    std::optional<Q> m;
    for (const auto& a : x.coords())
        if (!a.is_zero() && (!m || a.from_scaled(*a.val_scaled()) < *m)) m = a.from_scaled(*a.val_scaled());
    return m.value_or(Q(0));
}

// -log_p bound on |x_n - y_n|' from the Cauchy estimate, m = 0..n.
Q cauchy_bound(std::int64_t p, int n, const Q& r, const Q& C, const Q& E) {
    std::optional<Q> best;
    for (int m = 0; m <= n; ++m) {
        Q v = Q(m) / r + E / (Q(ipow(p, m)) * r);
        if (!best || v < *best) best = v;
    }
    return C / r - Q(n) / r + *best;
}

}  // namespace

TEST_CASE("Teichmuller constructor and accessor") {
    auto F = field(2);
    auto t = w_teichmuller(mono(F, Q(1)), 2);
    CHECK(ps_identical(w_coords(t)[0], mono(F, Q(1))));
    CHECK(w_coords(t)[1].is_exact_zero());
    CHECK(w_teichmuller(PerfSeries::zero(F), 3).is_zero());
}

TEST_CASE("addition examples for p = 2") {
    auto F = field(2);
    auto t = w_teichmuller(mono(F, Q(1)), 2);
    auto s = w_add(t, t);
    CHECK(s.coord(0).is_exact_zero());
    CHECK(ps_identical(s.coord(1), mono(F, Q(1))));
    auto x = mono(F, Q(1, 2)), y = mono(F, Q(3));
    auto xy = w_add(w_teichmuller(x, 2), w_teichmuller(y, 2));
    CHECK(ps_identical(xy.coord(0), ps_add(x, y)));
    CHECK(ps_identical(xy.coord(1), mono(F, Q(7, 4))));
    CHECK(w_identical(w_add(xy, WittVec::zero(F, 2)), xy));
}

TEST_CASE("multiplication and inverse examples") {
    auto F = field(3);
    auto a = w_teichmuller(mono(F, Q(1)), 3), b = w_teichmuller(mono(F, Q(1, 2 + 1)), 3);
    CHECK(w_identical(w_mul(a, b), w_teichmuller(mono(F, Q(4, 3)), 3)));
    auto G = field(3, Q(1), 4, Q(24));
    auto x = W(G, {PerfSeries::one(G), mono(G, Q(1))});
    auto inv = w_inv(x);
    CHECK(ps_identical(inv.coord(0), PerfSeries::one(G)));
    CHECK(ps_identical(inv.coord(1), mono(G, Q(1), -1)));
    CHECK_THROWS_AS(w_inv(W(G, {PerfSeries::zero(G), PerfSeries::one(G)})), NonUnitError);
}

TEST_CASE("integer images use Teichmuller digits") {
    for (std::int64_t p : {2, 3, 5}) {
        auto F = field(p);
        auto pw = WittVec::from_int(F, 3, p);
        CHECK(pw.coord(0).is_exact_zero());
        CHECK(ps_identical(pw.coord(1), PerfSeries::one(F)));
        CHECK(pw.coord(2).is_exact_zero());
        for (std::int64_t a = -6; a <= 6; ++a) {
            for (std::int64_t b = -6; b <= 6; ++b) {
                auto sa = WittVec::from_int(F, 3, a), sb = WittVec::from_int(F, 3, b);
                CHECK(w_equal(w_add(sa, sb), WittVec::from_int(F, 3, a + b)));
                CHECK(w_equal(w_mul(sa, sb), WittVec::from_int(F, 3, a * b)));
            }
        }
    }
}

TEST_CASE("Frobenius examples") {
    auto F = field(3);
    auto t = w_teichmuller(mono(F, Q(1)), 3);
    CHECK(w_identical(w_frobenius(t, 1), w_teichmuller(mono(F, Q(3)), 3)));
    std::mt19937_64 rng(7);
    for (int i = 0; i < 30; ++i) {
        auto x = random_witt(F, 3, rng, 3, Q(-2), Q(4), 1);
        auto y = random_witt(F, 3, rng, 3, Q(-2), Q(4), 1);
        CHECK(w_identical(w_frobenius(w_frobenius(x, -1), 1), x));
        CHECK(w_equal(w_frobenius(w_add(x, y), 1), w_add(w_frobenius(x, 1), w_frobenius(y, 1))));
        CHECK(w_equal(w_frobenius(w_mul(x, y), -1), w_mul(w_frobenius(x, -1), w_frobenius(y, -1))));
    }
}

TEST_CASE("Gauss norm examples") {
    auto F = field(3, Q(1));
    auto x = W(F, {mono(F, Q(1)), mono(F, Q(-1)), PerfSeries::zero(F)});
    CHECK(gauss_norm(x, Q(1)).value == Q(0));
    CHECK(gauss_norm(x, Q(3)).value == Q(-2));
    CHECK(gauss_norm(x, Q(3)).is_finite());
    CHECK(coeff_sup_norm(x).value == Q(-1));
    CHECK(gauss_norm(WittVec::zero(F, 3), Q(1)).kind == NegLog::Kind::Infinite);
    auto fuzzy = W(F, {PerfSeries::zero_at(F, F->S), mono(F, Q(2)), PerfSeries::zero(F)});
    auto g = gauss_norm(fuzzy, Q(1));
    CHECK(g.kind == NegLog::Kind::AtLeast);
    CHECK(g.value == Q(1));
    CHECK_THROWS_AS(gauss_norm(x, Q(0)), ParameterError);
}

TEST_CASE("Hensel examples") {
    auto F = field(3);
    const int N = 3;
    auto one = WittVec::one(F, N);
    auto c0 = w_mul(WittVec::from_int(F, N, 3), w_teichmuller(mono(F, Q(1)), N));
    auto res = w_hensel_root({c0, one, one}, Q(1));
    CHECK(w_poly_eval({c0, one, one}, res.root).is_zero());
    CHECK(res.root.coord(0).is_zero());
    CHECK(ps_identical(res.root.coord(1), mono(F, Q(1), -1)));
    CHECK(res.iterations <= 3);
    CHECK(res.trace.size() == static_cast<std::size_t>(res.iterations) + 1);
    CHECK(res.trace.back().kind == NegLog::Kind::Infinite);

    auto lin = w_hensel_root({WittVec::from_int(F, N, 3), one});
    CHECK(w_equal(lin.root, WittVec::from_int(F, N, -3)));
    CHECK_THROWS_AS(w_hensel_root({c0, WittVec::from_int(F, N, 3), one}), PreconditionError);
    CHECK_THROWS_AS(w_hensel_root({one, one}), PreconditionError);
}

TEST_CASE("Hensel iteration count on random polynomials") {
    std::mt19937_64 rng(8);
    for (std::int64_t p : {2, 3}) {
        auto F = field(p, Q(1), 5);
        for (int N : {2, 3, 4}) {
            for (int i = 0; i < 5; ++i) {
                auto P0 = w_shift(random_witt(F, N, rng, 2, Q(0), Q(3), 0), 1);
                auto P1 = W(F, std::vector<PerfSeries>(N, PerfSeries::zero(F)));
                std::vector<PerfSeries> c(N, PerfSeries::zero(F));
                c[0] = PerfSeries::one(F);
                P1 = W(F, c);
                auto P2 = random_witt(F, N, rng, 2, Q(0), Q(3), 0);
                auto res = w_hensel_root({P0, P1, P2});
                CHECK(w_poly_eval({P0, P1, P2}, res.root).is_zero());
                CHECK(res.iterations <= std::bit_width(static_cast<unsigned>(N - 1)) + 1);
            }
        }
    }
}

TEST_CASE("ring axioms on random triples") {
    std::mt19937_64 rng(12345);
    const auto start = std::chrono::steady_clock::now();
    int count = 0;
    for (std::int64_t p : {2, 3}) {
        auto F = field(p, Q(1), 4);
        auto zero = WittVec::zero(F, 3), one = WittVec::one(F, 3);
        for (int i = 0; i < 500; ++i, ++count) {
            auto x = random_witt(F, 3, rng, 2, Q(-2), Q(3), 1);
            auto y = random_witt(F, 3, rng, 2, Q(-2), Q(3), 1);
            auto z = random_witt(F, 3, rng, 2, Q(-2), Q(3), 1);
            CHECK(w_equal(w_add(w_add(x, y), z), w_add(x, w_add(y, z))));
            CHECK(w_equal(w_add(x, y), w_add(y, x)));
            CHECK(w_equal(w_mul(w_mul(x, y), z), w_mul(x, w_mul(y, z))));
            CHECK(w_equal(w_mul(x, y), w_mul(y, x)));
            CHECK(w_equal(w_mul(x, w_add(y, z)), w_add(w_mul(x, y), w_mul(x, z))));
            CHECK(w_equal(w_add(x, zero), x));
            CHECK(w_equal(w_mul(x, one), x));
            CHECK(w_add(x, w_neg(x)).is_zero());
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    MESSAGE("ring axioms: " << count << " triples in " << secs << " s");
    CHECK(count >= 1000);
}

TEST_CASE("addition and multiplication agree with the symbolic oracle") {
    std::mt19937_64 rng(99);
    int checked = 0;
    for (std::int64_t p : {2, 3}) {
        const int M = 3;
        auto F = field(p, Q(1), M);
        for (int N : {2, 3}) {
            const int E = M + N - 1;
            for (int i = 0; i < 30; ++i) {
                auto x = random_witt(F, N, rng, 2, Q(-1), Q(3), 1);
                auto y = random_witt(F, N, rng, 2, Q(-1), Q(3), 1);
                std::vector<SymElt> sx, sy;
                for (int n = 0; n < N; ++n) {
                    sx.push_back(sym_from_series(x.coord(n), E));
                    sy.push_back(sym_from_series(y.coord(n), E));
                }
                auto add = sym_witt_op(sx, sy, SymOp::Add);
                auto mul = sym_witt_op(sx, sy, SymOp::Mul);
                auto wa = w_add(x, y), wm = w_mul(x, y);
                for (int n = 0; n < N; ++n) {
                    CHECK(ps_identical(sym_to_series(add[n], F), wa.coord(n)));
                    CHECK(ps_identical(sym_to_series(mul[n], F), wm.coord(n)));
                }
                ++checked;
            }
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("Gauss norm is ultrametric and multiplicative") {
    std::mt19937_64 rng(31);
    for (std::int64_t p : {2, 3}) {
        auto F = field(p, cyclotomic_scale(p), 4);
        for (int i = 0; i < 100; ++i) {
            auto x = random_witt(F, 3, rng, 3, Q(-2), Q(4), 1);
            auto y = random_witt(F, 3, rng, 3, Q(-2), Q(4), 1);
            for (Q r : {Q(1), Q(1, 2), Q(3)}) {
                auto nx = gauss_norm(x, r), ny = gauss_norm(y, r);
                auto ns = gauss_norm(w_add(x, y), r), nm = gauss_norm(w_mul(x, y), r);
                if (nx.is_finite() && ny.is_finite()) {
                    if (!(ns.kind == NegLog::Kind::Infinite)) CHECK(*lower(ns) >= std::min(nx.value, ny.value));
                    // Every coordinate of x*y has valuation at least vx + vy, so the
                    // levels lost to truncation have -log norm at least this window.
                    const Q window = Q(3) + r * F->scale * (min_val(x) + min_val(y));
                    if (nx.value + ny.value < window) {
                        REQUIRE(nm.is_finite());
                        CHECK(nm.value == nx.value + ny.value);
                    } else if (nm.kind != NegLog::Kind::Infinite) {
                        CHECK(*lower(nm) >= std::min(nx.value + ny.value, window));
                    }
                }
            }
        }
    }
}

TEST_CASE("Hadamard convexity and small-r limits") {
    std::mt19937_64 rng(32);
    auto F = field(3, cyclotomic_scale(3), 4);
    const Q c = F->scale;
    for (int i = 0; i < 200; ++i) {
        auto x = random_witt(F, 3, rng, 3, Q(-2), Q(4), 1);
        if (x.is_zero()) continue;
        for (Q r : {Q(1), Q(2), Q(1, 3)}) {
            auto nr = gauss_norm(x, r);
            for (Q s : {r, r / 2, r / 5}) CHECK(gauss_norm(x, s).value >= (s / r) * nr.value);
        }
        int lead = 0;
        while (x.coord(lead).is_zero()) ++lead;
        const Q v0 = x.coord(lead).from_scaled(*x.coord(lead).val_scaled());
        // Below this radius the leading level alone attains the minimum.
        std::optional<Q> rstar;
        for (int n = lead + 1; n < 3; ++n) {
            if (x.coord(n).is_zero()) continue;
            const Q vn = x.coord(n).from_scaled(*x.coord(n).val_scaled());
            if (vn < v0) {
                const Q bound = Q(n - lead) / (c * (v0 - vn));
                if (!rstar || bound < *rstar) rstar = bound;
            }
        }
        std::optional<Q> prev;
        for (int k = 0; k < 16; ++k) {
            const Q r(1, ipow(2, k));
            if (rstar && r > *rstar) continue;
            const Q v = gauss_norm(x, r).value;
            CHECK(v == Q(lead) + r * c * v0);
            if (lead == 0 && prev) CHECK(abs(v) <= abs(*prev));
            if (lead > 0) CHECK(v >= Q(1) - r * c * abs(v0));
            prev = v;
        }
        REQUIRE(prev);
        CHECK(abs(*prev - Q(lead)) <= Q(1, 1 << 15) * c * abs(v0) * 2);
    }
}

TEST_CASE("Cauchy estimate on coordinate differences") {
    std::mt19937_64 rng(33);
    int checked = 0;
    for (std::int64_t p : {2, 3}) {
        auto F = field(p, Q(1), 4);
        for (int i = 0; i < 150; ++i) {
            auto x = random_witt(F, 3, rng, 3, Q(0), Q(4), 1);
            auto d = w_shift(random_witt(F, 3, rng, 2, Q(0), Q(4), 1), 1);
            auto y = w_add(x, d);
            for (Q r : {Q(1), Q(1, 2), Q(2)}) {
                auto nx = gauss_norm(x, r), ny = gauss_norm(y, r), nd = gauss_norm(w_sub(x, y), r);
                if (!nx.is_finite() || !ny.is_finite() || !nd.is_finite()) continue;
                const Q C = std::min(nx.value, ny.value);
                const Q E = nd.value - C;
                if (E <= 0) continue;
                for (int n = 0; n < 3; ++n) {
                    auto diff = ps_sub(x.coord(n), y.coord(n));
                    if (diff.is_zero()) continue;
                    const Q lhs = F->scale * diff.from_scaled(*diff.val_scaled());
                    CHECK(lhs >= cauchy_bound(p, n, r, C, E));
                }
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}
