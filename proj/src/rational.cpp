#include "perfectoid/rational.hpp"

#include "perfectoid/errors.hpp"

#include <cstdlib>

namespace perfectoid {

std::string q_to_string(const Q& q) {
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

Q q_parse(const std::string& s) {
    auto slash = s.find('/');
    try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
            std::int64_t n = std::stoll(s, &used);
            if (used != s.size()) throw SchemaError("bad rational: " + s);
            return Q(n);
        }
        std::string a = s.substr(0, slash), b = s.substr(slash + 1);
        std::int64_t n = std::stoll(a, &used);
        if (used != a.size()) throw SchemaError("bad rational: " + s);
        std::int64_t d = std::stoll(b, &used);
        if (used != b.size()) throw SchemaError("bad rational: " + s);
        if (d == 0) throw SchemaError("zero denominator: " + s);
        return Q(n, d);
    } catch (const std::logic_error&) {
        throw SchemaError("bad rational: " + s);
    }
}

std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (__builtin_mul_overflow(r, base, &r)) throw PrecisionError("integer power overflow");
    }
    return r;
}

bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

bool is_p_power(std::int64_t d, std::int64_t p) {
    if (d <= 0) return false;
    while (d % p == 0) d /= p;
    return d == 1;
}

int p_valuation(std::int64_t n, std::int64_t p) {
    if (n == 0) throw ParameterError("p_valuation of zero");
    int k = 0;
    while (n % p == 0) {
        n /= p;
        ++k;
    }
    return k;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

std::int64_t q_floor(const Q& q) { return floor_div(q.numerator(), q.denominator()); }

std::int64_t q_ceil(const Q& q) { return ceil_div(q.numerator(), q.denominator()); }

std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

int p_denominator_exponent(const Q& q, std::int64_t p) {
    std::int64_t d = q.denominator();
    if (!is_p_power(d, p))
        throw SchemaError("denominator of " + q_to_string(q) + " is not a power of " + std::to_string(p));
    return d == 1 ? 0 : p_valuation(d, p);
}

}  // namespace perfectoid
