#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

#include "perfectoid/errors.hpp"
#include "perfectoid/symstrict.hpp"
#include "perfectoid/tilting.hpp"

using namespace perfectoid;
using namespace testsupport;

namespace {

PerfSeries mono(const FieldPtr& F, Q e, std::int64_t c = 1) { return PerfSeries::monomial(F, e, F->fq.from_int(c)); }

UntiltElt teich(const PrimitivePtr& z, Q e, std::int64_t c = 1) {
    return UntiltElt::teichmuller(z, mono(z->field_ptr(), e, c));
}

WittVec random_integral(const PrimitivePtr& z, std::mt19937_64& rng, int terms = 2) {
    return random_witt(z->field_ptr(), z->N(), rng, terms, Q(0), Q(3), 1);
}

Q neglog(const NegLog& v) {
    REQUIRE(v.is_finite());
    return v.value;
}

}  // namespace

TEST_CASE("Kummer primitive element") {
    auto z3 = preset_primitive(PrimitiveKind::Kummer, 3, 3);
    auto F = z3->field_ptr();
    CHECK(ps_identical(z3->z.coord(0), mono(F, Q(1), -1)));
    CHECK(ps_identical(z3->z.coord(1), PerfSeries::one(F)));
    CHECK(z3->z.coord(2).is_exact_zero());

    // p = 2: compare with the symbolic oracle for 2 + (-[t]).
    auto z2 = preset_primitive(PrimitiveKind::Kummer, 2, 3);
    auto G = z2->field_ptr();
    const int E = G->M + 2;
    auto t = sym_from_series(mono(G, Q(1)), E);
    SymElt zero(2, 1, E, 1), one = SymElt::constant(2, 1, E, 1, 1);
    auto minus_t = sym_witt_op({t, zero, zero}, {one, one, one}, SymOp::Mul);
    auto expect = sym_witt_op({zero, one, zero}, minus_t, SymOp::Add);
    for (int n = 0; n < 3; ++n) {
        INFO(z2->z.coord(n).to_string() << " vs " << sym_to_series(expect[n], G).to_string());
        CHECK(ps_identical(z2->z.coord(n), sym_to_series(expect[n], G)));
    }
}

TEST_CASE("cyclotomic primitive element") {
    auto z = preset_primitive(PrimitiveKind::Cyclotomic, 2, 2);
    auto F = z->field_ptr();
    CHECK(ps_identical(z->z.coord(0), mono(F, Q(1, 2))));
    CHECK(ps_identical(z->z.coord(1), ps_add(PerfSeries::one(F), mono(F, Q(1, 4)))));
    for (std::int64_t p : {2, 3, 5}) {
        auto zp = preset_primitive(PrimitiveKind::Cyclotomic, p, 3);
        const auto& z0 = zp->z.coord(0);
        CHECK(z0.from_scaled(*z0.val_scaled()) == Q(p - 1, p));
        CHECK(zp->field().scale * z0.from_scaled(*z0.val_scaled()) == Q(1));
    }
}

TEST_CASE("primitive check failures") {
    auto F = tilting_field(PrimitiveKind::Kummer, 3, 3);
    auto bad = w_sub(WittVec::from_int(F, 3, 3), WittVec::teichmuller(mono(F, Q(2)), 3));
    CHECK_THROWS_AS(primitive_check(bad), NotPrimitiveError);
    auto no_unit = w_sub(WittVec::from_int(F, 3, 9), WittVec::teichmuller(mono(F, Q(1)), 3));
    CHECK_THROWS_AS(primitive_check(no_unit), NotPrimitiveError);
    CHECK_THROWS_AS(primitive_check(WittVec::teichmuller(mono(F, Q(1)), 1)), NotPrimitiveError);
}

TEST_CASE("primitivity depends only on z mod p^2") {
    std::mt19937_64 rng(41);
    for (auto kind : {PrimitiveKind::Kummer, PrimitiveKind::Cyclotomic}) {
        auto z = preset_primitive(kind, 3, 4);
        for (int i = 0; i < 10; ++i) {
            auto c = z->z.coords();
            c[2] = random_series(z->field_ptr(), rng, 3, Q(0), Q(3), 1);
            c[3] = random_series(z->field_ptr(), rng, 3, Q(0), Q(3), 1);
            CHECK_NOTHROW(primitive_check(WittVec(z->field_ptr(), c)));
        }
    }
}

TEST_CASE("stable reduction examples") {
    auto z = preset_primitive(PrimitiveKind::Kummer, 3, 3);
    auto F = z->field_ptr();
    auto r = stable_reduce_traced(WittVec::from_int(F, 3, 3), *z);
    CHECK(w_identical(r.rep, WittVec::teichmuller(mono(F, Q(1)), 3)));
    CHECK(r.passes == 1);
    auto t = WittVec::teichmuller(mono(F, Q(1)), 3);
    CHECK(w_identical(stable_reduce(t, *z), t));
    CHECK(stable_reduce(z->z, *z).is_zero());
    CHECK_THROWS_AS(stable_reduce(WittVec::teichmuller(mono(F, Q(-1)), 3), *z), PreconditionError);
}

TEST_CASE("untilt arithmetic examples") {
    auto z = preset_primitive(PrimitiveKind::Kummer, 3, 3);
    auto p = UntiltElt::from_int(z, 3);
    CHECK(untilt_equal(untilt_mul(p, p), teich(z, Q(2))));
    CHECK(w_identical(untilt_mul(p, p).rep(), teich(z, Q(2)).rep()));
    auto a = teich(z, Q(1, 3));
    CHECK(w_identical(untilt_add(a, UntiltElt::zero(z)).rep(), a.rep()));

    for (std::int64_t pr : {2, 3, 5}) {
        auto zc = preset_primitive(PrimitiveKind::Cyclotomic, pr, pr == 5 ? 2 : 3);
        auto F = zc->field_ptr();
        auto u = UntiltElt::teichmuller(zc, ps_frobenius(ps_add(PerfSeries::one(F), mono(F, Q(1))), -1));
        UntiltElt sum = UntiltElt::zero(zc), power = UntiltElt::one(zc);
        for (int i = 0; i < pr; ++i) {
            sum = untilt_add(sum, power);
            power = untilt_mul(power, u);
        }
        CHECK(sum.is_zero());
        // u^p = [1 + t] and u != 1.
        CHECK(untilt_equal(power, UntiltElt::teichmuller(zc, ps_add(PerfSeries::one(F), mono(F, Q(1))))));
        CHECK_FALSE(untilt_equal(u, UntiltElt::one(zc)));
    }
}

TEST_CASE("untilt norm examples") {
    auto z = preset_primitive(PrimitiveKind::Kummer, 3, 3);
    CHECK(neglog(untilt_norm(UntiltElt::from_int(z, 3))) == Q(1));
    auto zc = preset_primitive(PrimitiveKind::Cyclotomic, 2, 3);
    CHECK(neglog(untilt_norm(UntiltElt::from_int(zc, 2))) == Q(1));
    CHECK(neglog(untilt_norm(teich(zc, Q(1, 2)))) == zc->field().scale / 2);
    CHECK(untilt_norm(UntiltElt::zero(z)).kind == NegLog::Kind::AtLeast);
    CHECK(untilt_norm(UntiltElt::from_int(z, 27)).kind == NegLog::Kind::AtLeast);
}

TEST_CASE("inverse and division") {
    auto z = preset_primitive(PrimitiveKind::Cyclotomic, 3, 3);
    std::mt19937_64 rng(42);
    for (int i = 0; i < 20; ++i) {
        auto x = UntiltElt(z, random_integral(z, rng));
        auto y = UntiltElt(z, random_integral(z, rng));
        auto nx = untilt_norm(x), ny = untilt_norm(y);
        if (!nx.is_finite() || !ny.is_finite()) continue;
        if (nx.value == Q(0)) CHECK(untilt_equal(untilt_mul(x, untilt_inv(x)), UntiltElt::one(z)));
        else CHECK_THROWS_AS(untilt_inv(x), NonUnitError);
        if (nx.value > ny.value) std::swap(x, y);
        if (nx.value == ny.value || untilt_norm(x).value <= untilt_norm(y).value) {
            auto q = untilt_div(y, x);
            CHECK(untilt_equal(untilt_mul(q, x), y));
        }
    }
    CHECK_THROWS_AS(untilt_inv(UntiltElt::zero(z)), DivisionByZeroError);
}

TEST_CASE("theta is a ring map") {
    std::mt19937_64 rng(43);
    for (auto kind : {PrimitiveKind::Kummer, PrimitiveKind::Cyclotomic}) {
        for (std::int64_t p : {2, 3}) {
            auto z = preset_primitive(kind, p, 3);
            for (int i = 0; i < 15; ++i) {
                auto x = random_integral(z, rng), y = random_integral(z, rng);
                auto cx = UntiltElt(z, x), cy = UntiltElt(z, y);
                CHECK(untilt_equal(UntiltElt(z, w_add(x, y)), untilt_add(cx, cy)));
                CHECK(untilt_equal(UntiltElt(z, w_mul(x, y)), untilt_mul(cx, cy)));
                CHECK(is_stable(cx.rep()));
            }
        }
    }
}

TEST_CASE("congruent stable representatives have the same norm") {
    std::mt19937_64 rng(44);
    for (auto kind : {PrimitiveKind::Kummer, PrimitiveKind::Cyclotomic}) {
        auto z = preset_primitive(kind, 3, 3);
        for (int i = 0; i < 15; ++i) {
            auto x = random_integral(z, rng), w = random_integral(z, rng);
            auto a = stable_reduce(x, *z), b = stable_reduce(w_add(x, w_mul(w, z->z)), *z);
            CHECK(untilt_norm(UntiltElt(z, a)).kind == untilt_norm(UntiltElt(z, b)).kind);
            if (untilt_norm(UntiltElt(z, a)).is_finite())
                CHECK(untilt_norm(UntiltElt(z, a)).value == untilt_norm(UntiltElt(z, b)).value);
        }
    }
}

TEST_CASE("multiples of z reduce to zero") {
    std::mt19937_64 rng(45);
    for (auto kind : {PrimitiveKind::Kummer, PrimitiveKind::Cyclotomic}) {
        for (std::int64_t p : {2, 3}) {
            auto z = preset_primitive(kind, p, 3);
            for (int i = 0; i < 15; ++i) {
                auto w = random_integral(z, rng);
                auto r = stable_reduce_traced(w_mul(w, z->z), *z);
                CHECK(r.rep.is_zero());
                CHECK(r.passes <= 4 * z->N());
            }
        }
    }
}

TEST_CASE("unit multiples of a primitive element are primitive") {
    std::mt19937_64 rng(46);
    for (auto kind : {PrimitiveKind::Kummer, PrimitiveKind::Cyclotomic}) {
        auto z = preset_primitive(kind, 3, 3);
        for (int i = 0; i < 15; ++i) {
            auto u = random_unit(z->field_ptr(), 3, rng, 2, Q(0), Q(3), 1);
            std::vector<PerfSeries> c = u.coords();
            c[0] = ps_add(PerfSeries::constant(z->field_ptr(), z->field().fq.from_int(1 + i % 2)),
                          random_series(z->field_ptr(), rng, 2, Q(1), Q(3), 1));
            u = WittVec(z->field_ptr(), c);
            CHECK_NOTHROW(primitive_check(w_mul(u, z->z)));
        }
    }
}

TEST_CASE("stable elements factor as Teichmuller times unit") {
    std::mt19937_64 rng(47);
    auto z = preset_primitive(PrimitiveKind::Cyclotomic, 2, 3);
    for (int i = 0; i < 20; ++i) {
        auto s = stable_reduce(random_integral(z, rng, 3), *z);
        if (s.is_zero()) continue;
        const auto inv0 = ps_inv(s.coord(0));
        std::vector<PerfSeries> uc;
        for (const auto& c : s.coords()) uc.push_back(ps_mul(c, inv0));
        WittVec unit(z->field_ptr(), uc);
        CHECK(unit.is_unit());
        for (const auto& c : uc)
            if (!c.is_zero()) CHECK(*c.val_scaled() >= 0);
        CHECK(w_equal(w_mul(WittVec::teichmuller(s.coord(0), 3), unit), s));
    }
}

TEST_CASE("residue map is a ring isomorphism onto o_F/(z0)") {
    std::mt19937_64 rng(48);
    for (auto kind : {PrimitiveKind::Kummer, PrimitiveKind::Cyclotomic}) {
        auto z = preset_primitive(kind, 3, 3);
        auto F = z->field_ptr();
        const Q top = Q(1) / F->scale;
        auto reduce = [&](const PerfSeries& a) {
            std::vector<PerfSeries::Term> t;
            for (const auto& term : a.terms())
                if (a.from_scaled(term.first) < top) t.push_back(term);
            return PerfSeries(F, t, kExact);
        };
        for (int i = 0; i < 20; ++i) {
            auto a = reduce(random_series(F, rng, 3, Q(0), top, 2));
            auto b = reduce(random_series(F, rng, 3, Q(0), top, 2));
            auto ca = UntiltElt::teichmuller(z, a), cb = UntiltElt::teichmuller(z, b);
            CHECK(ps_identical(untilt_residue(ca), a));
            CHECK(ps_identical(untilt_residue(untilt_add(ca, cb)), reduce(ps_add(a, b))));
            CHECK(ps_identical(untilt_residue(untilt_mul(ca, cb)), reduce(ps_mul(a, b))));
        }
    }
}

TEST_CASE("norm is multiplicative on classes") {
    std::mt19937_64 rng(49);
    for (auto kind : {PrimitiveKind::Kummer, PrimitiveKind::Cyclotomic}) {
        auto z = preset_primitive(kind, 2, 3);
        for (int i = 0; i < 20; ++i) {
            auto a = UntiltElt(z, random_integral(z, rng)), b = UntiltElt(z, random_integral(z, rng));
            auto na = untilt_norm(a), nb = untilt_norm(b), nab = untilt_norm(untilt_mul(a, b));
            if (na.is_finite() && nb.is_finite() && na.value + nb.value < Q(z->N())) {
                REQUIRE(nab.is_finite());
                CHECK(nab.value == na.value + nb.value);
            } else {
                CHECK(nab.kind == NegLog::Kind::AtLeast);
            }
        }
    }
}

TEST_CASE("root finding examples") {
    auto z2 = preset_primitive(PrimitiveKind::Kummer, 2, 3);
    auto sq = untilt_root({untilt_neg(teich(z2, Q(1))), UntiltElt::zero(z2), UntiltElt::one(z2)}, 3);
    CHECK(sq.exact);
    CHECK(untilt_equal(sq.root, teich(z2, Q(1, 2))));
    CHECK(sq.steps.size() == 2);

    auto z = preset_primitive(PrimitiveKind::Kummer, 3, 3);
    auto one = UntiltElt::one(z);

    auto lin = untilt_root({untilt_neg(UntiltElt::from_int(z, 3)), one}, 2);
    CHECK(lin.exact);
    CHECK(untilt_equal(lin.root, teich(z, Q(1))));

    auto c0 = untilt_mul(UntiltElt::from_int(z, 3), teich(z, Q(1)));
    auto r = untilt_root({c0, one, one}, 3);
    CHECK(!r.final_residual.is_finite());
    for (std::size_t n = 0; n < r.steps.size(); ++n) CHECK(r.steps[n].certified);
    CHECK(untilt_poly_eval({c0, one, one}, r.root).is_zero());
}

TEST_CASE("root iteration contract on split polynomials") {
    std::mt19937_64 rng(50);
    for (auto kind : {PrimitiveKind::Kummer, PrimitiveKind::Cyclotomic}) {
        auto z = preset_primitive(kind, 2, 3);
        auto F = z->field_ptr();
        for (int i = 0; i < 6; ++i) {
            auto a = nonzero_series(F, rng, 2, Q(0), Q(1), 1);
            auto b = nonzero_series(F, rng, 2, Q(2), Q(3), 1);
            auto r1 = UntiltElt::teichmuller(z, a), r2 = UntiltElt::teichmuller(z, b);
            std::vector<UntiltElt> P{untilt_mul(r1, r2), untilt_neg(untilt_add(r1, r2)), UntiltElt::one(z)};
            const int steps = z->N() - 1;
            auto res = untilt_root(P, steps);
            for (std::size_t n = 0; n < res.steps.size(); ++n) {
                CHECK(res.steps[n].certified);
                if (res.steps[n].step_neglog) CHECK(*res.steps[n].step_neglog >= Q(static_cast<int>(n), 2));
            }
            CHECK(res.final_residual.certifies(Q(steps)));
        }
    }
}
