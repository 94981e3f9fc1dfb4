#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace perfectoid {

inline constexpr int kMaxFqDegree = 8;

// Coordinates of an element of F_{p^f} in the basis 1, t, ..., t^{f-1}.
struct FqElem {
    std::array<std::uint16_t, kMaxFqDegree> c{};
    auto operator<=>(const FqElem&) const = default;
};

// The finite field F_p[t]/(modulus) with a user-supplied irreducible modulus.
class Fq {
public:
    // modulus: coefficients low to high, degree f (leading coefficient nonzero).
    Fq(std::int64_t p, int f, std::vector<std::int64_t> modulus);

    // F_p with modulus t (identity residue).
    static Fq prime_field(std::int64_t p);

    std::int64_t p() const { return p_; }
    int f() const { return f_; }
    const std::vector<std::int64_t>& modulus() const { return modulus_; }
    std::int64_t order() const;  // p^f, saturating

    FqElem zero() const { return FqElem{}; }
    FqElem one() const;
    FqElem from_int(std::int64_t a) const;
    FqElem from_vector(const std::vector<std::int64_t>& v) const;
    std::vector<std::int64_t> to_vector(const FqElem& a) const;
    // Element with base-p digit expansion of index as coordinates.
    FqElem from_index(std::int64_t index) const;

    static bool is_zero(const FqElem& a);
    bool is_one(const FqElem& a) const;
    // Returns the F_p value of a constant element; throws if a is not in F_p.
    std::int64_t to_prime(const FqElem& a) const;

    FqElem add(const FqElem& a, const FqElem& b) const;
    FqElem sub(const FqElem& a, const FqElem& b) const;
    FqElem neg(const FqElem& a) const;
    FqElem mul(const FqElem& a, const FqElem& b) const;
    FqElem inv(const FqElem& a) const;
    FqElem pow(const FqElem& a, std::uint64_t e) const;
    // a^{p^k}; negative k applies the inverse Frobenius.
    FqElem frobenius(const FqElem& a, int k) const;

    bool operator==(const Fq& o) const {
        return p_ == o.p_ && f_ == o.f_ && modulus_ == o.modulus_;
    }

private:
    std::int64_t p_;
    int f_;
    std::vector<std::int64_t> modulus_;  // monic, length f+1
};

// Trial factorization over F_p; poly is low-to-high.
bool is_irreducible_mod_p(const std::vector<std::int64_t>& poly, std::int64_t p);

}  // namespace perfectoid
