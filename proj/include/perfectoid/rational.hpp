#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>

namespace boost {

// Under C++20 rewritten comparisons, rational<int64_t> == integer recurses without end.
inline bool operator==(const rational<std::int64_t>& a, int b) { return a == rational<std::int64_t>(b); }
inline bool operator==(int a, const rational<std::int64_t>& b) { return rational<std::int64_t>(a) == b; }
inline bool operator==(const rational<std::int64_t>& a, std::int64_t b) { return a == rational<std::int64_t>(b); }
inline bool operator==(std::int64_t a, const rational<std::int64_t>& b) { return rational<std::int64_t>(a) == b; }

}  // namespace boost

namespace perfectoid {

using Q = boost::rational<std::int64_t>;

// "num/den" with den > 0; integers keep the "/1" suffix.
std::string q_to_string(const Q& q);

// Accepts "num/den" or a bare integer.
Q q_parse(const std::string& s);

std::int64_t ipow(std::int64_t base, int exp);

bool is_prime(std::int64_t n);

// True iff d = p^k for some k >= 0.
bool is_p_power(std::int64_t d, std::int64_t p);

// Largest k with p^k | n; n != 0.
int p_valuation(std::int64_t n, std::int64_t p);

std::int64_t floor_div(std::int64_t a, std::int64_t b);
std::int64_t ceil_div(std::int64_t a, std::int64_t b);

std::int64_t q_floor(const Q& q);
std::int64_t q_ceil(const Q& q);

// Nonnegative residue of a modulo m.
std::int64_t mod_floor(std::int64_t a, std::int64_t m);

// Exponent k of the reduced denominator p^k of q; throws if not a p-power.
int p_denominator_exponent(const Q& q, std::int64_t p);

}  // namespace perfectoid
