#include "perfectoid/fq.hpp"

#include "perfectoid/errors.hpp"
#include "perfectoid/rational.hpp"

namespace perfectoid {

namespace {

using Poly = std::vector<std::int64_t>;

void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

std::int64_t inv_mod(std::int64_t a, std::int64_t p) {
    a = mod_floor(a, p);
    if (a == 0) throw DivisionByZeroError("inverse of 0 mod p");
    std::int64_t r = 1, e = p - 2;
    while (e > 0) {
        if (e & 1) r = r * a % p;
        a = a * a % p;
        e >>= 1;
    }
    return r;
}

// Remainder of a modulo b over F_p; b nonzero.
Poly poly_rem(Poly a, const Poly& b, std::int64_t p) {
    trim(a);
    const std::int64_t lead_inv = inv_mod(b.back(), p);
    while (a.size() >= b.size()) {
        std::int64_t q = a.back() * lead_inv % p;
        std::size_t shift = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] = mod_floor(a[shift + i] - q * b[i], p);
        trim(a);
    }
    return a;
}

}  // namespace

bool is_irreducible_mod_p(const std::vector<std::int64_t>& poly_in, std::int64_t p) {
    Poly poly;
    for (auto c : poly_in) poly.push_back(mod_floor(c, p));
    trim(poly);
    if (poly.size() < 2) return false;
    const int deg = static_cast<int>(poly.size()) - 1;
    for (int d = 1; 2 * d <= deg; ++d) {
        const std::int64_t count = ipow(p, d);
        for (std::int64_t idx = 0; idx < count; ++idx) {
            Poly cand(d + 1);
            std::int64_t t = idx;
            for (int i = 0; i < d; ++i) {
                cand[i] = t % p;
                t /= p;
            }
            cand[d] = 1;
            if (poly_rem(poly, cand, p).empty()) return false;
        }
    }
    return true;
}

Fq::Fq(std::int64_t p, int f, std::vector<std::int64_t> modulus) : p_(p), f_(f) {
    if (!is_prime(p) || p >= (1 << 15)) throw ParameterError("Fq: p must be a prime below 2^15");
    if (f < 1 || f > kMaxFqDegree) throw ParameterError("Fq: extension degree must lie in [1, 8]");
    if (static_cast<int>(modulus.size()) != f + 1) throw ParameterError("Fq: modulus must have degree f");
    for (auto& c : modulus) c = mod_floor(c, p);
    if (modulus.back() == 0) throw ParameterError("Fq: modulus leading coefficient vanishes mod p");
    if (!is_irreducible_mod_p(modulus, p)) throw ParameterError("Fq: modulus is reducible over F_p");
    const std::int64_t li = inv_mod(modulus.back(), p);
    for (auto& c : modulus) c = c * li % p;
    modulus_ = std::move(modulus);
}

Fq Fq::prime_field(std::int64_t p) { return Fq(p, 1, {0, 1}); }

std::int64_t Fq::order() const {
    std::int64_t r = 1;
    for (int i = 0; i < f_; ++i) {
        if (__builtin_mul_overflow(r, p_, &r)) return INT64_MAX;
    }
    return r;
}

FqElem Fq::one() const {
    FqElem r;
    r.c[0] = 1;
    return r;
}

FqElem Fq::from_int(std::int64_t a) const {
    FqElem r;
    r.c[0] = static_cast<std::uint16_t>(mod_floor(a, p_));
    return r;
}

FqElem Fq::from_vector(const std::vector<std::int64_t>& v) const {
    if (static_cast<int>(v.size()) > f_) throw SchemaError("Fq coefficient vector longer than f");
    FqElem r;
    for (std::size_t i = 0; i < v.size(); ++i) r.c[i] = static_cast<std::uint16_t>(mod_floor(v[i], p_));
    return r;
}

std::vector<std::int64_t> Fq::to_vector(const FqElem& a) const {
    std::vector<std::int64_t> v(f_);
    for (int i = 0; i < f_; ++i) v[i] = a.c[i];
    return v;
}

FqElem Fq::from_index(std::int64_t index) const {
    FqElem r;
    for (int i = 0; i < f_; ++i) {
        r.c[i] = static_cast<std::uint16_t>(index % p_);
        index /= p_;
    }
    return r;
}

bool Fq::is_zero(const FqElem& a) {
    for (auto v : a.c)
        if (v) return false;
    return true;
}

bool Fq::is_one(const FqElem& a) const { return a == one(); }

std::int64_t Fq::to_prime(const FqElem& a) const {
    for (int i = 1; i < f_; ++i)
        if (a.c[i]) throw ParameterError("Fq element does not lie in the prime field");
    return a.c[0];
}

FqElem Fq::add(const FqElem& a, const FqElem& b) const {
    FqElem r;
    for (int i = 0; i < f_; ++i) {
        std::int64_t s = a.c[i] + b.c[i];
        if (s >= p_) s -= p_;
        r.c[i] = static_cast<std::uint16_t>(s);
    }
    return r;
}

FqElem Fq::sub(const FqElem& a, const FqElem& b) const {
    FqElem r;
    for (int i = 0; i < f_; ++i) {
        std::int64_t s = static_cast<std::int64_t>(a.c[i]) - b.c[i];
        if (s < 0) s += p_;
        r.c[i] = static_cast<std::uint16_t>(s);
    }
    return r;
}

FqElem Fq::neg(const FqElem& a) const { return sub(FqElem{}, a); }

FqElem Fq::mul(const FqElem& a, const FqElem& b) const {
    if (f_ == 1) {
        FqElem r;
        r.c[0] = static_cast<std::uint16_t>(static_cast<std::int64_t>(a.c[0]) * b.c[0] % p_);
        return r;
    }
    std::array<std::int64_t, 2 * kMaxFqDegree> prod{};
    for (int i = 0; i < f_; ++i) {
        if (!a.c[i]) continue;
        for (int j = 0; j < f_; ++j) prod[i + j] = (prod[i + j] + static_cast<std::int64_t>(a.c[i]) * b.c[j]) % p_;
    }
    for (int k = 2 * f_ - 2; k >= f_; --k) {
        const std::int64_t q = prod[k];
        if (!q) continue;
        prod[k] = 0;
        for (int i = 0; i < f_; ++i) prod[k - f_ + i] = mod_floor(prod[k - f_ + i] - q * modulus_[i], p_);
    }
    FqElem r;
    for (int i = 0; i < f_; ++i) r.c[i] = static_cast<std::uint16_t>(prod[i]);
    return r;
}

FqElem Fq::pow(const FqElem& a, std::uint64_t e) const {
    FqElem r = one(), b = a;
    while (e > 0) {
        if (e & 1) r = mul(r, b);
        b = mul(b, b);
        e >>= 1;
    }
    return r;
}

FqElem Fq::inv(const FqElem& a) const {
    if (is_zero(a)) throw DivisionByZeroError("Fq: inverse of zero");
    if (f_ == 1) return from_int(inv_mod(a.c[0], p_));
    // Extended Euclid in F_p[t] against the modulus.
    Poly r0 = modulus_, r1(f_);
    for (int i = 0; i < f_; ++i) r1[i] = a.c[i];
    trim(r1);
    Poly s0{0}, s1{1};
    auto sub_mul = [&](const Poly& x, const Poly& y, const Poly& q) {
        Poly out = x;
        for (std::size_t i = 0; i < q.size(); ++i)
            for (std::size_t j = 0; j < y.size(); ++j) {
                if (out.size() <= i + j) out.resize(i + j + 1, 0);
                out[i + j] = mod_floor(out[i + j] - q[i] * y[j], p_);
            }
        trim(out);
        return out;
    };
    while (!r1.empty() && r1.size() > 1) {
        Poly q, rem = r0;
        trim(rem);
        const std::int64_t li = inv_mod(r1.back(), p_);
        q.assign(rem.size() >= r1.size() ? rem.size() - r1.size() + 1 : 1, 0);
        while (rem.size() >= r1.size()) {
            std::int64_t c = rem.back() * li % p_;
            std::size_t shift = rem.size() - r1.size();
            q[shift] = c;
            for (std::size_t i = 0; i < r1.size(); ++i) rem[shift + i] = mod_floor(rem[shift + i] - c * r1[i], p_);
            trim(rem);
        }
        trim(q);
        Poly s2 = sub_mul(s0, s1, q);
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = s2;
    }
    if (r1.empty()) throw InternalError("Fq: modulus not coprime to element");
    const std::int64_t ci = inv_mod(r1[0], p_);
    FqElem out;
    for (std::size_t i = 0; i < s1.size() && static_cast<int>(i) < f_; ++i)
        out.c[i] = static_cast<std::uint16_t>(s1[i] * ci % p_);
    return out;
}

FqElem Fq::frobenius(const FqElem& a, int k) const {
    if (f_ == 1 || k == 0) return a;
    int steps = ((k % f_) + f_) % f_;
    FqElem r = a;
    for (int i = 0; i < steps; ++i) r = pow(r, static_cast<std::uint64_t>(p_));
    return r;
}

}  // namespace perfectoid
