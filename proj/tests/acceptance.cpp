// Acceptance criteria 1-12: one PASS/FAIL line each, exit status 1 if any fails.
#include "perfectoid/suites.hpp"
#include "perfectoid/symstrict.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

using namespace perfectoid;

namespace {

// All comparisons are exact; the only tolerances are wall-clock limits.
constexpr double kNoLimit = 0.0;
constexpr double kAxiomsLimitSeconds = 60.0;
constexpr double kOracleLimitSeconds = 120.0;
constexpr double kDescentLimitSeconds = 300.0;

constexpr int kN = 3;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool passed = true;
    std::string detail;
    void add(const CheckResult& r) {
        if (!detail.empty()) detail += "; ";
        detail += r.name + (r.passed ? " ok" : " FAILED") + " cases=" + std::to_string(r.cases);
        if (!r.passed) {
            passed = false;
            detail += " (" + r.message + ")";
        }
    }
    void expect(bool ok, const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? " ok" : " FAILED");
        passed = passed && ok;
    }
};

FieldPtr witt_field(std::int64_t p) { return make_field(p, Q(1), 4, Q(24)); }
FieldPtr norm_field(std::int64_t p) { return make_field(p, cyclotomic_scale(p), 4, Q(24)); }

bool run(int id, const std::string& title, double limit, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.passed = false;
        o.detail += std::string(" exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = o.passed;
    std::ostringstream time;
    time.setf(std::ios::fixed);
    time.precision(2);
    time << secs << "s";
    if (limit > kNoLimit) {
        time << " (limit " << limit << "s)";
        if (secs >= limit) {
            ok = false;
            time << " over limit";
        }
    }
    std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << title << "  [" << o.detail << "] " << time.str()
              << std::endl;
    return ok;
}

std::vector<CarryTerm> sorted(std::vector<CarryTerm> v) {
    std::sort(v.begin(), v.end(), [](const CarryTerm& a, const CarryTerm& b) { return a.ex < b.ex; });
    return v;
}

}  // namespace

int main() {
    bool all = true;

    all &= run(1, "Witt ring axioms, 1000 triples, p in {2,3}, N=3", kAxiomsLimitSeconds, [] {
        Outcome o;
        for (std::int64_t p : {2, 3}) o.add(check_witt_axioms(witt_field(p), kN, 1000, kSeed + p));
        return o;
    });

    all &= run(2, "Witt sum and product against the symbolic oracle, 100 pairs, p in {2,3}, N=3", kOracleLimitSeconds, [] {
        Outcome o;
        for (std::int64_t p : {2, 3}) o.add(check_witt_oracle(p, kN, 100, kSeed + 10 + p));
        return o;
    });

    all &= run(3, "carry tables at N=2 against the binomial expansion", kNoLimit, [] {
        Outcome o;
        o.add(check_carry_tables({{2, 2}, {3, 2}}));
        const CarryTable t2 = build_carry_table(2, 2), t3 = build_carry_table(3, 2);
        const std::vector<CarryTerm> sum{{Q(0), Q(1), 1}, {Q(1), Q(0), 1}};
        o.expect(sorted(t2.polys[0]) == sum, "p=2 level 0 is x+y");
        o.expect(sorted(t2.polys[1]) == std::vector<CarryTerm>{{Q(1, 2), Q(1, 2), 1}}, "p=2 level 1 is (xy)^(1/2)");
        o.expect(sorted(t3.polys[1]) == std::vector<CarryTerm>{{Q(1, 3), Q(2, 3), 2}, {Q(2, 3), Q(1, 3), 2}},
                 "p=3 level 1 is 2x^(1/3)y^(2/3)+2x^(2/3)y^(1/3)");
        return o;
    });

    all &= run(4, "Gauss norm multiplicativity and ultrametric inequality, 500 pairs x 5 radii; Hadamard convexity and limit, 100 samples",
               kNoLimit, [] {
                   Outcome o;
                   const std::vector<Q> radii{Q(1), Q(1, 2), Q(1, 3), Q(2), Q(3)};
                   for (std::int64_t p : {2, 3}) {
                       o.add(check_gauss_norm(norm_field(p), kN, 500, radii, kSeed + 20 + p));
                       o.add(check_hadamard(norm_field(p), kN, 100, kSeed + 30 + p));
                   }
                   return o;
               });

    all &= run(5, "preset primitives validate; 50 unit multiples stay primitive", kNoLimit, [] {
        Outcome o;
        for (std::int64_t p : {2, 3}) o.add(check_primitives(p, kN, 50, kSeed + 40 + p));
        return o;
    });

    all &= run(6, "stable reduction: p -> [t], z -> 0, norm invariance on 100 classes, cyclotomic relation at N=3", kNoLimit, [] {
        Outcome o;
        for (std::int64_t p : {2, 3}) o.add(check_stable_reduction(p, kN, 100, kSeed + 50 + p));
        return o;
    });

    all &= run(7, "root iteration certificates for 3 steps on 10 polynomials (d <= 3), exact Frobenius cases", kNoLimit, [] {
        Outcome o;
        for (std::int64_t p : {2, 3}) o.add(check_untilt_roots(p, 4, 10, 3, kSeed + 60 + p));
        return o;
    });

    all &= run(8, "Hensel roots: P(x) = 0 mod p^N, x = 0 mod p, 20 polynomials", kNoLimit, [] {
        Outcome o;
        for (std::int64_t p : {2, 3}) o.add(check_hensel(witt_field(p), kN, 20, kSeed + 70 + p));
        return o;
    });

    all &= run(9, "phi/gamma compatibility on 200 elements; gamma contraction gap >= p^n, n in {1,2}, 100 samples", kNoLimit, [] {
        Outcome o;
        for (std::int64_t p : {2, 3}) {
            o.add(check_phi_gamma(p, kN, 200, kSeed + 80 + p));
            o.add(check_gamma_gap(p, {1, 2}, 100, 0, kSeed + 90 + p));
        }
        return o;
    });

    all &= run(10, "decomposition and splitting round trips, 200 elements, denominators <= p^2, N=3, zero residual", kNoLimit, [] {
        Outcome o;
        for (std::int64_t p : {2, 3}) o.add(check_split(p, kN, 200, 2, kSeed + 100 + p));
        return o;
    });

    all &= run(11, "descent on 20 gauged modules, d in {1,2}, p=2, N=3", kDescentLimitSeconds, [] {
        Outcome o;
        o.add(check_descent(2, kN, {1, 2}, 10, kSeed + 110));
        return o;
    });

    all &= run(12, "good basis on 20 inputs = 1 mod p: |G - 1|_1 < 1, U = 1 mod p", kNoLimit, [] {
        Outcome o;
        o.add(check_good_basis(2, kN, 20, kSeed + 120));
        return o;
    });

    std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
    return all ? 0 : 1;
}
