#pragma once

#include "perfectoid/perfseries.hpp"
#include "perfectoid/witt.hpp"

#include <optional>
#include <random>

namespace perfectoid::sampling {

inline FqElem fq_rand(const Fq& fq, std::mt19937_64& rng, bool nonzero = false) {
    std::uniform_int_distribution<std::int64_t> d(nonzero ? 1 : 0, fq.order() - 1);
    return fq.from_index(d(rng));
}

// Random series with exponents in [lo, hi) at denominator p^den_k.
inline PerfSeries random_series(const FieldPtr& F, std::mt19937_64& rng, int max_terms, Q lo, Q hi, int den_k,
                                std::optional<Q> prec = std::nullopt) {
    const std::int64_t step = F->S / ipow(F->p(), den_k);
    const std::int64_t a = q_ceil(lo * F->S / step), b = q_ceil(hi * F->S / step);
    std::uniform_int_distribution<std::int64_t> de(a, b - 1);
    std::uniform_int_distribution<int> dn(1, max_terms);
    std::vector<PerfSeries::Term> t;
    const int n = dn(rng);
    for (int i = 0; i < n; ++i) t.emplace_back(de(rng) * step, fq_rand(F->fq, rng, true));
    const std::int64_t pr = prec ? q_floor(*prec * F->S) : kExact;
    return PerfSeries(F, std::move(t), pr);
}

inline PerfSeries nonzero_series(const FieldPtr& F, std::mt19937_64& rng, int max_terms, Q lo, Q hi, int den_k,
                                 std::optional<Q> prec = std::nullopt) {
    for (;;) {
        auto s = random_series(F, rng, max_terms, lo, hi, den_k, prec);
        if (!s.is_zero()) return s;
    }
}

// Random exact Witt vector; each coordinate is zero with probability 1/4.
inline WittVec random_witt(const FieldPtr& F, int N, std::mt19937_64& rng, int max_terms, Q lo, Q hi, int den_k) {
    std::uniform_int_distribution<int> coin(0, 3);
    std::vector<PerfSeries> c;
    for (int n = 0; n < N; ++n)
        c.push_back(coin(rng) == 0 ? PerfSeries::zero(F) : random_series(F, rng, max_terms, lo, hi, den_k));
    return WittVec(F, std::move(c));
}

inline WittVec random_unit(const FieldPtr& F, int N, std::mt19937_64& rng, int max_terms, Q lo, Q hi, int den_k) {
    auto x = random_witt(F, N, rng, max_terms, lo, hi, den_k);
    std::vector<PerfSeries> c = x.coords();
    c[0] = nonzero_series(F, rng, max_terms, lo, hi, den_k);
    return WittVec(F, std::move(c));
}

}  // namespace perfectoid::sampling
