#include "perfectoid/suites.hpp"

#include "perfectoid/aring.hpp"
#include "perfectoid/descent.hpp"
#include "perfectoid/errors.hpp"
#include "perfectoid/sampling.hpp"
#include "perfectoid/symstrict.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace perfectoid {

using namespace sampling;

// ---------------------------------------------------------------- configuration

namespace {

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError("config: " + msg); }

std::int64_t cfg_int(const Json& j, const char* key) {
    if (!j.at(key).is_number_integer()) config_fail(std::string(key) + " must be an integer");
    return j.at(key).get<std::int64_t>();
}

std::string cfg_string(const Json& j, const char* key) {
    if (!j.at(key).is_string()) config_fail(std::string(key) + " must be a string");
    return j.at(key).get<std::string>();
}

}  // namespace

Config config_from_json(const Json& j) {
    if (!j.is_object()) config_fail("expected an object");
    static const std::set<std::string> keys{"p",      "f",         "modulus", "N",    "e_max", "M",
                                            "preset", "window",    "cache_dir", "seed", "gamma", "workers"};
    for (const auto& [k, v] : j.items())
        if (!keys.count(k)) config_fail("unknown key \"" + k + "\"");
    Config c;
    if (j.contains("p")) c.p = cfg_int(j, "p");
    if (j.contains("f")) c.f = static_cast<int>(cfg_int(j, "f"));
    if (j.contains("modulus")) {
        if (!j.at("modulus").is_array()) config_fail("modulus must be an array");
        for (const auto& m : j.at("modulus")) {
            if (!m.is_number_integer()) config_fail("modulus entries must be integers");
            c.modulus.push_back(m.get<std::int64_t>());
        }
    }
    if (j.contains("N")) c.N = static_cast<int>(cfg_int(j, "N"));
    if (j.contains("e_max")) {
        const Json& e = j.at("e_max");
        if (e.is_number_integer()) {
            c.e_max = Q(e.get<std::int64_t>());
        } else if (e.is_string()) {
            try {
                c.e_max = q_parse(e.get<std::string>());
            } catch (const SchemaError& ex) {
                config_fail(std::string("e_max: ") + ex.what());
            }
        } else {
            config_fail("e_max must be an integer or a rational string");
        }
    }
    if (j.contains("M")) c.M = static_cast<int>(cfg_int(j, "M"));
    if (j.contains("preset")) {
        const std::string s = cfg_string(j, "preset");
        if (s == "cyclotomic") c.preset = PrimitiveKind::Cyclotomic;
        else if (s == "kummer") c.preset = PrimitiveKind::Kummer;
        else config_fail("preset must be cyclotomic or kummer");
    }
    if (j.contains("window")) {
        const Json& w = j.at("window");
        if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() || !w[1].is_number_integer())
            config_fail("window must be [lo, hi]");
        c.window_lo = w[0].get<std::int64_t>();
        c.window_hi = w[1].get<std::int64_t>();
    }
    if (j.contains("cache_dir")) c.cache_dir = cfg_string(j, "cache_dir");
    if (j.contains("seed")) {
        const std::int64_t s = cfg_int(j, "seed");
        if (s < 0) config_fail("seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (j.contains("gamma")) c.gamma = cfg_string(j, "gamma");
    if (j.contains("workers")) c.workers = static_cast<int>(cfg_int(j, "workers"));
    validate_config(c);
    return c;
}

Json config_to_json(const Config& c) {
    Json j{{"p", c.p},
           {"f", c.f},
           {"N", c.N},
           {"e_max", q_to_string(c.e_max)},
           {"M", c.M},
           {"preset", to_string(c.preset)},
           {"window", Json::array({c.window_lo, c.window_hi})},
           {"seed", c.seed},
           {"gamma", c.gamma}};
    if (!c.modulus.empty()) j["modulus"] = c.modulus;
    return j;
}

void validate_config(const Config& c) {
    if (c.p < 2 || !is_prime(c.p)) config_fail("p = " + std::to_string(c.p) + " is not prime");
    if (c.p > 7) config_fail("p must be at most 7");
    if (c.f < 1 || c.f > kMaxFqDegree) config_fail("f must lie in [1, 8]");
    if (c.N < 1 || c.N > 6) config_fail("N must lie in [1, 6]");
    if (c.M < 0 || c.M > 12) config_fail("M must lie in [0, 12]");
    if (c.e_max <= Q(0)) config_fail("e_max must be positive");
    if (c.window_lo > c.window_hi) config_fail("window is empty");
    if (c.workers < 0) config_fail("workers must be nonnegative");
    try {
        (void)config_field(c);
        (void)GammaElt::parse(c.p, c.gamma);
    } catch (const std::exception& e) {
        config_fail(e.what());
    }
}

Fq config_residue_field(const Config& c) {
    if (c.f == 1 && c.modulus.empty()) return Fq::prime_field(c.p);
    return Fq(c.p, c.f, c.modulus);
}

FieldPtr config_field(const Config& c) {
    const Q scale = c.preset == PrimitiveKind::Kummer ? kummer_scale() : cyclotomic_scale(c.p);
    return make_field(config_residue_field(c), scale, c.M, c.e_max);
}

// ---------------------------------------------------------------- checks

namespace {

struct Tally {
    CheckResult r;
    explicit Tally(std::string name) { r.name = std::move(name); r.passed = true; }
    void expect(bool ok, const std::string& what) {
        if (!ok && r.passed) {
            r.passed = false;
            r.message = what;
        } else if (!ok) {
            r.passed = false;
        }
    }
    CheckResult done() { return std::move(r); }
};

std::string tag(std::int64_t p, int i) { return "p=" + std::to_string(p) + " case " + std::to_string(i); }

Q min_val(const WittVec& x) {
    std::optional<Q> m;
    for (const auto& a : x.coords())
        if (!a.is_zero() && (!m || a.from_scaled(*a.val_scaled()) < *m)) m = a.from_scaled(*a.val_scaled());
    return m.value_or(Q(0));
}

ASeries random_a(std::int64_t p, int N, std::mt19937_64& rng, std::int64_t lo, std::int64_t hi, int terms) {
    const std::int64_t m = ipow(p, N);
    std::uniform_int_distribution<std::int64_t> di(lo, hi), dc(1, m - 1);
    std::map<std::int64_t, std::int64_t> c;
    for (int i = 0; i < terms; ++i) c[di(rng)] = dc(rng);
    return ASeries(p, N, std::move(c));
}

std::int64_t binom(std::int64_t n, std::int64_t k) {
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

CheckResult check_witt_axioms(const FieldPtr& F, int N, int triples, std::uint64_t seed) {
    Tally t("witt.ring-axioms");
    std::mt19937_64 rng(seed);
    const WittVec zero = WittVec::zero(F, N), one = WittVec::one(F, N);
    for (int i = 0; i < triples; ++i) {
        const WittVec x = random_witt(F, N, rng, 2, Q(-2), Q(3), 1);
        const WittVec y = random_witt(F, N, rng, 2, Q(-2), Q(3), 1);
        const WittVec z = random_witt(F, N, rng, 2, Q(-2), Q(3), 1);
        const std::string at = tag(F->p(), i);
        t.expect(w_equal(w_add(w_add(x, y), z), w_add(x, w_add(y, z))), "additive associativity, " + at);
        t.expect(w_equal(w_add(x, y), w_add(y, x)), "additive commutativity, " + at);
        t.expect(w_equal(w_mul(w_mul(x, y), z), w_mul(x, w_mul(y, z))), "multiplicative associativity, " + at);
        t.expect(w_equal(w_mul(x, y), w_mul(y, x)), "multiplicative commutativity, " + at);
        t.expect(w_equal(w_mul(x, w_add(y, z)), w_add(w_mul(x, y), w_mul(x, z))), "distributivity, " + at);
        t.expect(w_equal(w_add(x, zero), x) && w_equal(w_mul(x, one), x), "identities, " + at);
        t.expect(w_add(x, w_neg(x)).is_zero(), "additive inverse, " + at);
        ++t.r.cases;
    }
    t.r.values = Json{{"p", F->p()}, {"N", N}};
    return t.done();
}

CheckResult check_witt_oracle(std::int64_t p, int N, int pairs, std::uint64_t seed) {
    Tally t("witt.symbolic-oracle");
    std::mt19937_64 rng(seed);
    const int M = 3;
    const FieldPtr F = make_field(p, Q(1), M, Q(24));
    const int E = M + N - 1;
    for (int i = 0; i < pairs; ++i) {
        const WittVec x = random_witt(F, N, rng, 2, Q(-1), Q(3), 1);
        const WittVec y = random_witt(F, N, rng, 2, Q(-1), Q(3), 1);
        std::vector<SymElt> sx, sy;
        for (int n = 0; n < N; ++n) {
            sx.push_back(sym_from_series(x.coord(n), E));
            sy.push_back(sym_from_series(y.coord(n), E));
        }
        const auto add = sym_witt_op(sx, sy, SymOp::Add);
        const auto mul = sym_witt_op(sx, sy, SymOp::Mul);
        const WittVec wa = w_add(x, y), wm = w_mul(x, y);
        for (int n = 0; n < N; ++n) {
            t.expect(ps_identical(sym_to_series(add[n], F), wa.coord(n)), "sum coordinate, " + tag(p, i));
            t.expect(ps_identical(sym_to_series(mul[n], F), wm.coord(n)), "product coordinate, " + tag(p, i));
        }
        ++t.r.cases;
    }
    t.r.values = Json{{"p", p}, {"N", N}};
    return t.done();
}

CheckResult check_carry_tables(const std::vector<std::pair<std::int64_t, int>>& sizes) {
    Tally t("witt.carry-table");
    Json vals = Json::array();
    for (const auto& [p, N] : sizes) {
        const CarryTable table = build_carry_table(p, N);
        const std::string at = "p=" + std::to_string(p) + " N=" + std::to_string(N);
        t.expect(table.polys.size() == static_cast<std::size_t>(N), "table length, " + at);
        if (table.polys.empty()) continue;
        // first level: x + y
        std::vector<CarryTerm> lin{{Q(0), Q(1), 1}, {Q(1), Q(0), 1}};
        auto p0 = table.polys[0];
        std::sort(p0.begin(), p0.end(), [](const auto& a, const auto& b) { return a.ex < b.ex; });
        t.expect(p0 == lin, "level 0, " + at);
        if (N >= 2) {
            // ((x^{1/p} + y^{1/p})^p - x - y) / p, negated mod p
            std::vector<CarryTerm> want;
            for (std::int64_t i = 1; i < p; ++i)
                want.push_back({Q(i, p), Q(p - i, p), mod_floor(-binom(p, i) / p, p)});
            auto p1 = table.polys[1];
            std::sort(p1.begin(), p1.end(), [](const auto& a, const auto& b) { return a.ex < b.ex; });
            t.expect(p1 == want, "level 1 against the binomial expansion, " + at);
            Json terms = Json::array();
            for (const auto& c : p1) terms.push_back(Json{{"ex", q_to_string(c.ex)}, {"ey", q_to_string(c.ey)}, {"c", c.c}});
            vals.push_back(Json{{"p", p}, {"N", N}, {"level1", std::move(terms)}});
        }
        ++t.r.cases;
    }
    t.r.values = std::move(vals);
    return t.done();
}

CheckResult check_hensel(const FieldPtr& F, int N, int polys, std::uint64_t seed) {
    Tally t("witt.hensel");
    std::mt19937_64 rng(seed);
    int max_iter = 0;
    for (int i = 0; i < polys; ++i) {
        const WittVec P0 = w_shift(random_witt(F, N, rng, 2, Q(0), Q(3), 0), 1);
        const WittVec P1 = w_add(WittVec::one(F, N), w_shift(random_witt(F, N, rng, 2, Q(0), Q(3), 0), 1));
        const WittVec P2 = random_witt(F, N, rng, 2, Q(0), Q(3), 0);
        const WittPoly P{P0, P1, P2};
        const HenselResult res = w_hensel_root(P);
        t.expect(w_poly_eval(P, res.root).is_zero(), "P(x) is not 0 mod p^N, " + tag(F->p(), i));
        t.expect(res.root.coord(0).is_zero(), "root is not 0 mod p, " + tag(F->p(), i));
        max_iter = std::max(max_iter, res.iterations);
        ++t.r.cases;
    }
    t.r.values = Json{{"p", F->p()}, {"N", N}, {"max_iterations", max_iter}};
    return t.done();
}

CheckResult check_gauss_norm(const FieldPtr& F, int N, int pairs, const std::vector<Q>& radii, std::uint64_t seed) {
    Tally t("norms.multiplicative-ultrametric");
    std::mt19937_64 rng(seed);
    std::int64_t exact_products = 0;
    for (int i = 0; i < pairs; ++i) {
        const WittVec x = random_witt(F, N, rng, 3, Q(-2), Q(4), 1);
        const WittVec y = random_witt(F, N, rng, 3, Q(-2), Q(4), 1);
        for (const Q& r : radii) {
            const NegLog nx = gauss_norm(x, r), ny = gauss_norm(y, r);
            const NegLog ns = gauss_norm(w_add(x, y), r), nm = gauss_norm(w_mul(x, y), r);
            if (!nx.is_finite() || !ny.is_finite()) continue;
            const std::string at = tag(F->p(), i) + " r=" + q_to_string(r);
            if (ns.kind != NegLog::Kind::Infinite)
                t.expect(*ns.lower() >= std::min(nx.value, ny.value), "strong triangle inequality, " + at);
            // levels lost to truncation have -log norm at least this window
            const Q window = Q(N) + r * F->scale * (min_val(x) + min_val(y));
            if (nx.value + ny.value < window) {
                t.expect(nm.is_finite() && nm.value == nx.value + ny.value, "multiplicativity, " + at);
                ++exact_products;
            } else if (nm.kind != NegLog::Kind::Infinite) {
                t.expect(*nm.lower() >= std::min(nx.value + ny.value, window), "product below the window, " + at);
            }
        }
        ++t.r.cases;
    }
    t.r.values = Json{{"p", F->p()}, {"exact_products", exact_products}};
    return t.done();
}

CheckResult check_hadamard(const FieldPtr& F, int N, int samples, std::uint64_t seed) {
    Tally t("norms.hadamard-limit");
    std::mt19937_64 rng(seed);
    const Q c = F->scale;
    for (int i = 0; i < samples; ++i) {
        const WittVec x = random_witt(F, N, rng, 3, Q(-2), Q(4), 1);
        if (x.is_zero()) continue;
        const std::string at = tag(F->p(), i);
        for (Q r : {Q(1), Q(2), Q(1, 3)}) {
            const NegLog nr = gauss_norm(x, r);
            for (Q s : {r / 2, r / 5}) t.expect(gauss_norm(x, s).value >= (s / r) * nr.value, "convexity, " + at);
        }
        int lead = 0;
        while (x.coord(lead).is_zero()) ++lead;
        const Q v0 = x.coord(lead).from_scaled(*x.coord(lead).val_scaled());
        // below rstar the leading level alone attains the minimum
        std::optional<Q> rstar;
        for (int n = lead + 1; n < N; ++n) {
            if (x.coord(n).is_zero()) continue;
            const Q vn = x.coord(n).from_scaled(*x.coord(n).val_scaled());
            if (vn < v0) {
                const Q bound = Q(n - lead) / (c * (v0 - vn));
                if (!rstar || bound < *rstar) rstar = bound;
            }
        }
        for (int k = 0; k < 16; ++k) {
            const Q r(1, ipow(2, k));
            if (rstar && r > *rstar) continue;
            t.expect(gauss_norm(x, r).value == Q(lead) + r * c * v0, "small-r limit, " + at);
        }
        ++t.r.cases;
    }
    t.r.values = Json{{"p", F->p()}};
    return t.done();
}

CheckResult check_primitives(std::int64_t p, int N, int units, std::uint64_t seed) {
    Tally t("tilt.primitive");
    std::mt19937_64 rng(seed);
    for (auto kind : {PrimitiveKind::Cyclotomic, PrimitiveKind::Kummer}) {
        PrimitivePtr z;
        try {
            z = preset_primitive(kind, p, N);
        } catch (const std::exception& e) {
            t.expect(false, to_string(kind) + " preset rejected: " + e.what());
            continue;
        }
        const FieldPtr& F = z->field_ptr();
        for (int i = 0; i < units; ++i) {
            std::vector<PerfSeries> c = random_unit(F, N, rng, 2, Q(0), Q(3), 1).coords();
            c[0] = ps_add(PerfSeries::constant(F, fq_rand(F->fq, rng, true)), random_series(F, rng, 2, Q(1), Q(3), 1));
            const WittVec u(F, c);
            bool ok = true;
            try {
                primitive_check(w_mul(u, z->z));
            } catch (const NotPrimitiveError&) {
                ok = false;
            }
            t.expect(ok, "unit multiple rejected, " + to_string(kind) + " " + tag(p, i));
            ++t.r.cases;
        }
    }
    t.r.values = Json{{"p", p}, {"N", N}};
    return t.done();
}

CheckResult check_stable_reduction(std::int64_t p, int N, int classes, std::uint64_t seed) {
    Tally t("tilt.stable-reduction");
    std::mt19937_64 rng(seed);
    {
        const PrimitivePtr z = preset_primitive(PrimitiveKind::Kummer, p, N);
        const FieldPtr& F = z->field_ptr();
        const WittVec tt = WittVec::teichmuller(PerfSeries::monomial(F, Q(1)), N);
        const WittVec rep = stable_reduce(WittVec::from_int(F, N, p), *z);
        // for odd p one pass lands on [t]; at p = 2 the coordinates of -[t] carry
        if (p % 2 == 1) t.expect(w_identical(rep, tt), "p reduces to [t] modulo p - [t]");
        t.expect(untilt_equal(UntiltElt(z, rep), UntiltElt::teichmuller(z, PerfSeries::monomial(F, Q(1)))),
                 "class of p differs from the class of [t]");
    }
    for (auto kind : {PrimitiveKind::Kummer, PrimitiveKind::Cyclotomic}) {
        const PrimitivePtr z = preset_primitive(kind, p, N);
        t.expect(stable_reduce(z->z, *z).is_zero(), "z does not reduce to zero, " + to_string(kind));
        for (int i = 0; i < classes; ++i) {
            const WittVec x = random_witt(z->field_ptr(), N, rng, 2, Q(0), Q(3), 1);
            const WittVec w = random_witt(z->field_ptr(), N, rng, 2, Q(0), Q(3), 1);
            const NegLog a = untilt_norm(UntiltElt(z, stable_reduce(x, *z)));
            const NegLog b = untilt_norm(UntiltElt(z, stable_reduce(w_add(x, w_mul(w, z->z)), *z)));
            t.expect(a.kind == b.kind && a.value == b.value, "norm changes under z-multiples, " + to_string(kind) + " " + tag(p, i));
            ++t.r.cases;
        }
    }
    {
        const PrimitivePtr z = preset_primitive(PrimitiveKind::Cyclotomic, p, N);
        const FieldPtr& F = z->field_ptr();
        const PerfSeries root = ps_frobenius(ps_add(PerfSeries::one(F), PerfSeries::monomial(F, Q(1))), -1);
        const UntiltElt u = UntiltElt::teichmuller(z, root);
        UntiltElt sum = UntiltElt::zero(z), pw = UntiltElt::one(z);
        for (std::int64_t i = 0; i < p; ++i) {
            sum = untilt_add(sum, pw);
            pw = untilt_mul(pw, u);
        }
        t.expect(sum.is_zero(), "sum of powers of the p-th root of 1+t is not zero");
    }
    t.r.values = Json{{"p", p}, {"N", N}};
    return t.done();
}

CheckResult check_untilt_roots(std::int64_t p, int N, int polys, int steps, std::uint64_t seed) {
    Tally t("tilt.untilt-root");
    std::mt19937_64 rng(seed);
    int exact_cases = 0;
    for (int i = 0; i < polys; ++i) {
        const auto kind = i % 2 == 0 ? PrimitiveKind::Kummer : PrimitiveKind::Cyclotomic;
        const PrimitivePtr z = preset_primitive(kind, p, N);
        const FieldPtr& F = z->field_ptr();
        const std::string at = to_string(kind) + " " + tag(p, i);
        std::vector<UntiltElt> P;
        const int shape = i % 3;
        std::optional<UntiltElt> expected;
        if (shape == 0) {
            // Frobenius case x^p - [a] with a monomial a whose norm is above the target,
            // so that x = 0 does not already satisfy the certificate
            std::vector<Q> exps;
            for (std::int64_t k = 0; Q(k, p) * F->scale < Q(steps); ++k) exps.push_back(Q(k, p));
            std::uniform_int_distribution<std::size_t> de(0, exps.size() - 1);
            const PerfSeries a = PerfSeries::monomial(F, exps[de(rng)], fq_rand(F->fq, rng, true));
            P.assign(static_cast<std::size_t>(p) + 1, UntiltElt::zero(z));
            P[0] = untilt_neg(UntiltElt::teichmuller(z, a));
            P.back() = UntiltElt::one(z);
            expected = UntiltElt::teichmuller(z, ps_frobenius(a, -1));
        } else {
            // split with Teichmuller roots of separated valuations
            const int d = shape == 2 ? 3 : 2;
            std::vector<UntiltElt> roots;
            for (int k = 0; k < d; ++k)
                roots.push_back(UntiltElt::teichmuller(z, nonzero_series(F, rng, 2, Q(2 * k), Q(2 * k + 1), 1)));
            P = {UntiltElt::one(z)};
            for (const auto& r : roots) {
                std::vector<UntiltElt> next(P.size() + 1, UntiltElt::zero(z));
                for (std::size_t k = 0; k < P.size(); ++k) {
                    next[k + 1] = untilt_add(next[k + 1], P[k]);
                    next[k] = untilt_sub(next[k], untilt_mul(P[k], r));
                }
                P = std::move(next);
            }
        }
        const int d = static_cast<int>(P.size()) - 1;
        std::optional<RootResult> opt;
        try {
            opt = untilt_root(P, steps);
        } catch (const std::exception& e) {
            t.expect(false, std::string("root iteration failed: ") + e.what() + ", " + at);
            continue;
        }
        const RootResult& res = *opt;
        for (std::size_t n = 0; n < res.steps.size(); ++n) {
            const RootStep& s = res.steps[n];
            t.expect(s.certified, "step certificate, " + at);
            if (s.step_neglog) t.expect(*s.step_neglog >= Q(static_cast<std::int64_t>(n), d), "step size, " + at);
        }
        t.expect(res.final_residual.certifies(Q(std::min<int>(steps, N))), "final residual, " + at);
        if (expected) {
            t.expect(res.exact && untilt_equal(res.root, *expected), "Frobenius case is not exact, " + at);
            ++exact_cases;
        }
        ++t.r.cases;
    }
    t.r.values = Json{{"p", p}, {"N", N}, {"steps", steps}, {"frobenius_cases", exact_cases}};
    return t.done();
}

CheckResult check_phi_gamma(std::int64_t p, int N, int elements, std::uint64_t seed) {
    Tally t("gamma.phi-gamma-compatibility");
    std::mt19937_64 rng(seed);
    const FieldPtr F = make_field(p, cyclotomic_scale(p), 2, Q(12));
    const FieldPtr L = make_field(p, Q(1), 3, Q(30));
    const GammaElt g = GammaElt::parse(p, "1+p^2");
    for (int i = 0; i < elements; ++i) {
        const std::string at = tag(p, i);
        const ASeries x = random_a(p, N, rng, -1, 3, 3);
        t.expect(w_equal(embed_a_to_w(a_phi(x), F), w_frobenius(embed_a_to_w(x, F), 1)), "embed after phi, " + at);
        const ASeries lhs = a_phi(a_gamma(x, g, 30));
        const ASeries rhs = a_gamma(a_phi(x), g, 30);
        t.expect(a_equal(lhs, rhs), "phi gamma = gamma phi on the imperfect ring, " + at);
        const PerfSeries a = random_series(L, rng, 3, Q(-1), Q(3), 1);
        t.expect(ps_equal(l_gamma(ps_frobenius(a, 1), g), ps_frobenius(l_gamma(a, g), 1)),
                 "phi gamma = gamma phi on the perfect field, " + at);
        ++t.r.cases;
    }
    t.r.values = Json{{"p", p}, {"N", N}, {"gamma", g.description()}};
    return t.done();
}

CheckResult check_gamma_gap(std::int64_t p, const std::vector<int>& levels, int samples, int gap_slack,
                            std::uint64_t seed) {
    Tally t(gap_slack == 0 ? "gamma.contraction-gap" : "gamma.contraction-gap-minus-one");
    std::mt19937_64 rng(seed);
    const FieldPtr F = make_field(p, Q(1), 2, Q(48));
    Json per_level = Json::array();
    for (int n : levels) {
        const GammaElt g = GammaElt::from_int(p, 1 + ipow(p, n));
        const Q bound = Q(ipow(p, n) - gap_slack);
        std::optional<Q> worst;
        std::int64_t below = 0;
        for (int i = 0; i < samples; ++i) {
            const PerfSeries a = nonzero_series(F, rng, 3, Q(-2), Q(5), 0);
            const GammaGap gap = gamma_contraction_check(a, n, g);
            const Q v = gap.gap.kind == NegLog::Kind::Infinite ? bound : gap.gap.value;
            if (!worst || v < *worst) worst = v;
            if (!gap.gap.certifies(bound)) ++below;
            t.expect(gap.gap.certifies(bound),
                     "gap " + gap.gap.to_string() + " below " + q_to_string(bound) + " at n=" + std::to_string(n) + ", " + tag(p, i));
            ++t.r.cases;
        }
        per_level.push_back(Json{{"n", n}, {"bound", q_to_string(bound)}, {"min_gap", q_to_string(worst.value_or(bound))},
                                 {"samples_below", below}});
    }
    t.r.values = Json{{"p", p}, {"levels", std::move(per_level)}};
    return t.done();
}

namespace {

CheckResult check_gamma_probe(std::int64_t p) {
    Tally t("gamma.frobenius-root-probe");
    const FieldPtr F = make_field(p, Q(1), 3, Q(30));
    const GammaElt g = GammaElt::from_int(p, 1 + p);
    const NegLog base = gamma_contraction_check(PerfSeries::monomial(F, Q(1)), 1, g).gap;
    Json gaps = Json::array({base.to_string()});
    for (int k = 1; k <= 3; ++k) {
        const NegLog gk = gamma_contraction_check(PerfSeries::monomial(F, Q(1, ipow(p, k))), 1, g).gap;
        t.expect(base.is_finite() && gk.is_finite() && gk.value == base.value / Q(ipow(p, k)),
                 "gap at k=" + std::to_string(k) + " is not the base gap over p^k");
        gaps.push_back(gk.to_string());
        ++t.r.cases;
    }
    t.r.values = Json{{"p", p}, {"gaps", std::move(gaps)}};
    return t.done();
}

}  // namespace

CheckResult check_split(std::int64_t p, int N, int elements, int max_den, std::uint64_t seed) {
    Tally t("gamma.decomposition-splitting");
    std::mt19937_64 rng(seed);
    const FieldPtr F = make_field(p, cyclotomic_scale(p), max_den + N - 1, Q(24));
    const GammaElt g = GammaElt::parse(p, "1+p^2");
    std::int64_t nontrivial = 0;
    for (int i = 0; i < elements; ++i) {
        const std::string at = tag(p, i);
        const int den = i % (max_den + 1);
        const PerfSeries a = random_series(F, rng, 5, Q(-2), Q(4), den);
        const ModpDecomposition d = decompose_modp(a, den);
        t.expect(ps_identical(recompose_modp(d), a), "recompose after decompose, " + at);
        const ModpDecomposition back = decompose_modp(recompose_modp(d), den);
        bool same = ps_identical(back.integral, d.integral) && back.parts.size() == d.parts.size();
        for (const auto& [e, s] : d.parts) same = same && back.parts.count(e) && ps_identical(back.parts.at(e), s);
        t.expect(same, "decompose after recompose, " + at);

        const WittVec x = random_witt(F, N, rng, 3, Q(-1), Q(3), den);
        std::optional<SplitResult> opt;
        try {
            opt = split_lift(x, g);
        } catch (const std::exception& e) {
            t.expect(false, std::string("split failed: ") + e.what() + ", " + at);
            continue;
        }
        const SplitResult& s = *opt;
        t.expect(s.certified, "split not certified, " + at);
        t.expect(s.residual.kind != NegLog::Kind::Finite, "nonzero residual " + s.residual.to_string() + ", " + at);
        t.expect(w_equal(split_reassemble(s.y, s.z, g, F, N), x), "reassembly, " + at);
        if (!s.z.empty()) ++nontrivial;
        ++t.r.cases;
    }
    t.r.values = Json{{"p", p}, {"N", N}, {"max_denominator", ipow(p, max_den)}, {"nontrivial_t_parts", nontrivial}};
    return t.done();
}

CheckResult check_descent(std::int64_t p, int N, const std::vector<int>& ranks, int seeds, std::uint64_t seed) {
    Tally t("descent.overconvergence");
    Json runs = Json::array();
    for (int d : ranks) {
        for (int i = 0; i < seeds; ++i) {
            GaugeParams P;
            P.p = p;
            P.N = N;
            P.d = d;
            if (p == 2) {
                P.M = 4;
                P.scale = Q(2);
                P.e_max = Q(24);
            } else {
                P.M = 3;
                P.scale = cyclotomic_scale(p);
                P.e_max = Q(12);
            }
            P.v_denominator = 1 + i % 2;
            const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
            const std::string at = "p=" + std::to_string(p) + " d=" + std::to_string(d) + " seed=" + std::to_string(s);
            try {
                const GaugedModule gm = random_gauge_module(s, P);
                const DescentReport rep = cc_descent(gm.hidden);
                t.expect(rep.schedule_ok, "norm schedule violated, " + at);
                t.expect(rep.h_in_a_layer, "H outside the A-layer, " + at);
                t.expect(rep.c_zero, "T-part of A is nonzero, " + at);
                t.expect(rep.commutation_zero, "commutation residual, " + at);
                t.expect(rep.base_extension_ok, "base extension does not reproduce the input, " + at);
                bool gauge_ok = true;
                for (const auto& x : wm_mul(gm.V, rep.U).e) gauge_ok = gauge_ok && to_a_layer(x, gm.hidden.gamma).has_value();
                t.expect(gauge_ok, "total gauge outside the A-layer, " + at);
                runs.push_back(Json{{"d", d},
                                    {"seed", s},
                                    {"r", q_to_string(rep.r)},
                                    {"eps_exponent", q_to_string(rep.eps_exponent)},
                                    {"iterations", rep.iterations}});
            } catch (const std::exception& e) {
                t.expect(false, std::string(e.what()) + ", " + at);
            }
            ++t.r.cases;
        }
    }
    t.r.values = Json{{"p", p}, {"N", N}, {"runs", std::move(runs)}};
    return t.done();
}

CheckResult check_good_basis(std::int64_t p, int N, int seeds, std::uint64_t seed) {
    Tally t("descent.good-basis");
    const FieldPtr F = make_field(p, cyclotomic_scale(p), p == 2 ? 8 : 6, Q(24));
    std::int64_t steps_taken = 0;
    for (int i = 0; i < seeds; ++i) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
        std::mt19937_64 rng(s);
        const int d = 1 + i % 2;
        WMat Fm{d, {}};
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                std::vector<PerfSeries> c(N, PerfSeries::zero(F));
                if (a == b) c[0] = PerfSeries::one(F);
                for (int n = 1; n < N; ++n) c[n] = random_series(F, rng, 2, Q(-1), Q(2), 0);
                Fm.e.push_back(WittVec(F, std::move(c)));
            }
        const std::string at = "p=" + std::to_string(p) + " seed=" + std::to_string(s);
        try {
            const GoodBasisResult gb = good_basis(Fm);
            t.expect(gb.norm.kind == NegLog::Kind::Infinite || gb.norm.value > Q(0), "|G_limit - 1|_1 >= 1, " + at);
            t.expect(gb.unit_mod_p, "U is not 1 mod p, " + at);
            t.expect(gb.certified, "not certified, " + at);
            t.expect(wm_equal(gb.G_limit, wm_mul(wm_mul(wm_inv(gb.U), Fm), wm_frobenius(gb.U, 1))),
                     "G_limit differs from U^-1 F phi(U), " + at);
            for (const auto& st : gb.steps) steps_taken += st.m > 0 ? 1 : 0;
        } catch (const std::exception& e) {
            t.expect(false, std::string(e.what()) + ", " + at);
        }
        ++t.r.cases;
    }
    t.r.values = Json{{"p", p}, {"N", N}, {"nontrivial_steps", steps_taken}};
    return t.done();
}

// ---------------------------------------------------------------- suites

bool SuiteReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"witt", "norms", "tilt", "gamma", "descent", "all"};
    return names;
}

namespace {

struct Job {
    std::string name;
    std::function<CheckResult()> run;
};

void add_suite(const std::string& name, const Config& c, std::vector<Job>& jobs) {
    const std::int64_t p = c.p;
    const int N = c.N;
    const std::uint64_t s = c.seed;
    if (name == "witt") {
        const FieldPtr F = make_field(config_residue_field(c), Q(1), c.M, c.e_max);
        jobs.push_back({"witt.ring-axioms", [=] { return check_witt_axioms(F, N, 1000, s); }});
        jobs.push_back({"witt.symbolic-oracle", [=] { return check_witt_oracle(p, std::min(N, 3), 100, s + 1); }});
        jobs.push_back({"witt.carry-table", [=] { return check_carry_tables({{p, 2}, {p, std::max(2, std::min(N, 3))}}); }});
        jobs.push_back({"witt.hensel", [=] { return check_hensel(F, N, 20, s + 2); }});
    } else if (name == "norms") {
        const FieldPtr F = config_field(c);
        jobs.push_back({"norms.multiplicative-ultrametric", [=] { return check_gauss_norm(F, N, 500, {Q(1), Q(1, 2), Q(1, 3), Q(2), Q(3)}, s + 3); }});
        jobs.push_back({"norms.hadamard-limit", [=] { return check_hadamard(F, N, 100, s + 4); }});
    } else if (name == "tilt") {
        jobs.push_back({"tilt.primitive", [=] { return check_primitives(p, N, 50, s + 5); }});
        jobs.push_back({"tilt.stable-reduction", [=] { return check_stable_reduction(p, N, 100, s + 6); }});
        jobs.push_back({"tilt.untilt-root", [=] { return check_untilt_roots(p, N + 1, 10, N, s + 7); }});
    } else if (name == "gamma") {
        jobs.push_back({"gamma.phi-gamma-compatibility", [=] { return check_phi_gamma(p, std::min(N, 3), 200, s + 8); }});
        jobs.push_back({"gamma.contraction-gap-minus-one", [=] { return check_gamma_gap(p, {1, 2}, 100, 1, s + 9); }});
        jobs.push_back({"gamma.frobenius-root-probe", [=] { return check_gamma_probe(p); }});
        jobs.push_back({"gamma.decomposition-splitting", [=] { return check_split(p, std::min(N, 3), 200, 2, s + 10); }});
    } else if (name == "descent") {
        jobs.push_back({"descent.overconvergence", [=] { return check_descent(p, N, {1}, 10, s + 11); }});
        jobs.push_back({"descent.overconvergence", [=] { return check_descent(p, N, {2}, 10, s + 12); }});
        jobs.push_back({"descent.good-basis", [=] { return check_good_basis(p, N, 20, s + 13); }});
    }
}

}  // namespace

SuiteReport run_suite(const std::string& name, const Config& c) {
    validate_config(c);
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ParameterError("unknown suite \"" + name + "\"");
    std::vector<Job> jobs;
    if (name == "all") {
        for (const auto& n : names)
            if (n != "all") add_suite(n, c, jobs);
    } else {
        add_suite(name, c, jobs);
    }
    std::vector<CheckResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                results[i] = jobs[i].run();
            } catch (const std::exception& e) {
                results[i].name = jobs[i].name;
                results[i].passed = false;
                results[i].message = e.what();
            }
        }
    };
    unsigned nthreads = c.workers > 0 ? static_cast<unsigned>(c.workers) : std::max(1u, std::thread::hardware_concurrency());
    nthreads = std::min<unsigned>(nthreads, static_cast<unsigned>(jobs.size()));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < nthreads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return SuiteReport{name, c, std::move(results)};
}

Json suite_report_to_json(const SuiteReport& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks)
        checks.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"cases", c.cases}, {"values", c.values}, {"message", c.message}});
    return Json{{"suite", r.suite}, {"config", config_to_json(r.config)}, {"checks", std::move(checks)}, {"passed", r.passed()}};
}

std::string suite_report_to_text(const SuiteReport& r) {
    std::ostringstream os;
    os << "suite " << r.suite << " (p=" << r.config.p << ", N=" << r.config.N << ", seed=" << r.config.seed << ")\n";
    for (const auto& c : r.checks) {
        os << (c.passed ? "  pass " : "  FAIL ") << c.name << "  cases=" << c.cases << "  " << c.values.dump();
        if (!c.passed) os << "\n       " << c.message;
        os << "\n";
    }
    os << (r.passed() ? "all checks passed" : "some checks failed") << "\n";
    return os.str();
}

}  // namespace perfectoid
