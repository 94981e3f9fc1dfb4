#pragma once

#include "perfectoid/perfseries.hpp"
#include "perfectoid/rational.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace perfectoid {

// Element of Z[X_1^{1/p^inf}, ..., X_k^{1/p^inf}] / p^N. Exponents are stored as
// integers in units of 1/p^E; coefficients are reduced to [0, p^N).
class SymElt {
public:
    using Mono = std::vector<std::int64_t>;

    SymElt(std::int64_t p, int N, int E, int nvars);

    static SymElt constant(std::int64_t p, int N, int E, int nvars, std::int64_t c);
    // Monomial c * prod X_i^{e_i} with rational exponents.
    static SymElt monomial(std::int64_t p, int N, int E, const std::vector<Q>& e, std::int64_t c = 1);

    std::int64_t p() const { return p_; }
    int N() const { return N_; }
    int E() const { return E_; }
    int nvars() const { return nvars_; }
    std::int64_t modulus() const { return mod_; }
    const std::map<Mono, std::int64_t>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const Mono& m, std::int64_t c);
    std::vector<Q> exponents(const Mono& m) const;
    // Same polynomial with coefficients reduced to a smaller modulus p^n.
    SymElt reduced(int n) const;

    std::string to_string(const std::vector<std::string>& names = {}) const;

    bool operator==(const SymElt& o) const;

private:
    std::int64_t p_;
    int N_;
    int E_;
    int nvars_;
    std::int64_t mod_;
    std::map<Mono, std::int64_t> terms_;
};

inline constexpr std::size_t kDefaultTermLimit = 50000;

SymElt sym_add(const SymElt& a, const SymElt& b);
SymElt sym_sub(const SymElt& a, const SymElt& b);
SymElt sym_scale(const SymElt& a, std::int64_t c);
SymElt sym_mul(const SymElt& a, const SymElt& b, std::size_t term_limit = kDefaultTermLimit);
// Exact division by p; the result lives modulo p^{N-1}.
SymElt sym_div_p(const SymElt& a);

// root^{p^{N-1}} mod p^N, where root is any lift of the p^{N-1}-th root.
SymElt sym_power_lift(const SymElt& root, int N, std::size_t term_limit = kDefaultTermLimit);
// Teichmuller lift [xbar] mod p^N of a characteristic-p polynomial (N = 1 element).
SymElt sym_teich_lift(const SymElt& xbar, int N, std::size_t term_limit = kDefaultTermLimit);
// Teichmuller coordinates of z, one characteristic-p polynomial per level.
std::vector<SymElt> sym_coords(const SymElt& z, std::size_t term_limit = kDefaultTermLimit);

enum class SymOp { Add, Mul };

// Brute-force Witt arithmetic: assemble sum p^n [x_n], apply op, read coordinates.
std::vector<SymElt> sym_witt_op(const std::vector<SymElt>& x, const std::vector<SymElt>& y, SymOp op,
                                std::size_t term_limit = kDefaultTermLimit);

// Conversions between exact one-variable series over F_p and characteristic-p SymElts.
SymElt sym_from_series(const PerfSeries& s, int E);
PerfSeries sym_to_series(const SymElt& s, const FieldPtr& F);

struct CarryTerm {
    Q ex;
    Q ey;
    std::int64_t c;
    bool operator==(const CarryTerm&) const = default;
};

// Universal polynomials P_n with [x] + [y] = sum p^n [P_n(x, y)].
struct CarryTable {
    std::int64_t p = 0;
    int N = 0;
    std::vector<std::vector<CarryTerm>> polys;
    bool operator==(const CarryTable&) const = default;
};

inline constexpr int kCarryTableMaxN = 5;

CarryTable build_carry_table(std::int64_t p, int N, int max_N = kCarryTableMaxN);
std::string carry_table_to_json(const CarryTable& t);
CarryTable carry_table_from_json(const std::string& text);
// Atomic write through a temporary file in the same directory.
void write_carry_table(const CarryTable& t, const std::string& path);
std::string carry_table_filename(std::int64_t p, int N);

// Cached table: memory first, then PERFECTOID_CACHE_DIR (rebuilt if unreadable).
std::shared_ptr<const CarryTable> carry_table(std::int64_t p, int N);

}  // namespace perfectoid
