#include "perfectoid/aring.hpp"

#include "perfectoid/errors.hpp"

#include <algorithm>
#include <sstream>

namespace perfectoid {

std::int64_t mod_mul(std::int64_t a, std::int64_t b, std::int64_t m) {
    return static_cast<std::int64_t>((static_cast<__int128>(a) * b) % m);
}

std::int64_t mod_pow(std::int64_t a, std::uint64_t e, std::int64_t m) {
    std::int64_t r = 1 % m, b = mod_floor(a, m);
    while (e) {
        if (e & 1) r = mod_mul(r, b, m);
        b = mod_mul(b, b, m);
        e >>= 1;
    }
    return r;
}

std::int64_t mod_inv(std::int64_t a, std::int64_t m) {
    std::int64_t g = m, x = 0, x1 = 1, a1 = mod_floor(a, m);
    while (a1) {
        const std::int64_t q = g / a1;
        std::tie(g, a1) = std::make_pair(a1, g - q * a1);
        std::tie(x, x1) = std::make_pair(x1, x - q * x1);
    }
    if (g != 1) throw NonUnitError("mod_inv: not a unit");
    return mod_floor(x, m);
}

int max_level(std::int64_t p) {
    int L = 0;
    std::int64_t v = 1;
    while (v <= (std::int64_t{1} << 62) / p) {
        v *= p;
        ++L;
    }
    return L;
}

namespace {

std::int64_t checked_level_modulus(std::int64_t p, int N) {
    if (!is_prime(p)) throw ParameterError("p must be prime");
    if (N < 1 || N > max_level(p)) throw ParameterError("p-adic level out of range");
    return ipow(p, N);
}

std::int64_t sat_add(std::int64_t a, std::int64_t b) {
    if (a == kExact || b == kExact) return kExact;
    return a + b;
}

// Small binomial coefficients mod p (arguments below p).
std::int64_t small_binom_mod(std::int64_t n, std::int64_t k, std::int64_t p) {
    if (k < 0 || k > n) return 0;
    std::int64_t num = 1, den = 1;
    for (std::int64_t i = 0; i < k; ++i) {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    return num * mod_inv(den, p) % p;
}

// C(n, k) mod p by Lucas, n, k >= 0.
std::int64_t lucas(std::int64_t n, std::int64_t k, std::int64_t p) {
    std::int64_t r = 1;
    while (k > 0 || n > 0) {
        const std::int64_t a = n % p, b = k % p;
        if (b > a) return 0;
        r = r * small_binom_mod(a, b, p) % p;
        n /= p;
        k /= p;
    }
    return r;
}

}  // namespace

// ---------------------------------------------------------------- GammaElt

GammaElt::GammaElt(std::int64_t p, std::int64_t value, bool exact, std::string description)
    : p_(p), L_(0), mod_(1), value_(0), exact_(exact), desc_(std::move(description)) {
    if (!is_prime(p)) throw ParameterError("gamma: p must be prime");
    L_ = max_level(p);
    mod_ = ipow(p, L_);
    if (value < 0 || value >= mod_) exact_ = false;
    value_ = mod_floor(value, mod_);
    if (value_ % p == 0) throw ParameterError("gamma must be a p-adic unit");
}

GammaElt GammaElt::from_int(std::int64_t p, std::int64_t g) { return GammaElt(p, g, g >= 0, std::to_string(g)); }

GammaElt GammaElt::parse(std::int64_t p, const std::string& text) {
    std::string s;
    for (char ch : text)
        if (ch != ' ') s += ch;
    if (s.rfind("1+p", 0) == 0) {
        int k = 1;
        if (s.size() > 3) {
            std::size_t used = 0;
            if (s[3] != '^') throw SchemaError("bad gamma: " + text);
            try {
                k = std::stoi(s.substr(4), &used);
            } catch (const std::logic_error&) {
                throw SchemaError("bad gamma: " + text);
            }
            if (used != s.size() - 4) throw SchemaError("bad gamma: " + text);
        }
        if (k < 1 || k >= max_level(p)) throw SchemaError("gamma exponent out of range: " + text);
        return GammaElt(p, 1 + ipow(p, k), true, s);
    }
    std::int64_t g = 0;
    try {
        std::size_t used = 0;
        g = std::stoll(s, &used);
        if (used != s.size()) throw SchemaError("bad gamma: " + text);
    } catch (const std::logic_error&) {
        throw SchemaError("bad gamma: " + text);
    }
    return GammaElt(p, g, g >= 0, s);
}

std::optional<int> GammaElt::v_minus_one() const {
    const std::int64_t d = mod_floor(value_ - 1, mod_);
    if (d == 0) return std::nullopt;
    return p_valuation(d, p_);
}

int GammaElt::digit(int i) const {
    if (i >= L_) {
        if (exact_) return 0;
        throw PrecisionError("gamma: digit beyond the stored p-adic level");
    }
    return static_cast<int>((value_ / ipow(p_, i)) % p_);
}

namespace {

// C(gamma, k) mod p^N for k = 0..K.
std::vector<std::int64_t> gamma_binomials(const GammaElt& g, std::int64_t K, int N) {
    const std::int64_t p = g.p(), modN = ipow(p, N);
    std::vector<std::int64_t> out{1 % modN};
    std::int64_t unit = 1;  // unit part mod p^N
    std::int64_t val = 0;
    for (std::int64_t k = 1; k <= K; ++k) {
        if (g.exact() && k > g.value()) {
            out.push_back(0);
            continue;
        }
        // numerator factor gamma - (k - 1)
        std::int64_t f;
        int vf;
        if (g.exact()) {
            f = g.value() - (k - 1);
            vf = p_valuation(f, p);
            f /= ipow(p, vf);
        } else {
            const std::int64_t d = mod_floor(g.value() - (k - 1), g.modulus());
            if (d == 0) throw PrecisionError("gamma binomial: factor vanishes at the stored level");
            vf = p_valuation(d, p);
            if (g.level() - vf < N) throw PrecisionError("gamma binomial: stored level too small");
            f = d / ipow(p, vf);
        }
        std::int64_t dk = k;
        const int vd = p_valuation(dk, p);
        dk /= ipow(p, vd);
        unit = mod_mul(mod_mul(unit, mod_floor(f, modN), modN), mod_inv(dk % modN, modN), modN);
        val += vf - vd;
        out.push_back(val >= N ? 0 : mod_mul(unit, ipow(p, static_cast<int>(val)), modN));
    }
    return out;
}

}  // namespace

std::int64_t GammaElt::binomial(std::int64_t k, int N) const { return gamma_binomials(*this, k, N).back(); }

GammaElt gamma_mul(const GammaElt& a, const GammaElt& b) {
    if (a.p() != b.p()) throw ParameterError("gamma: mismatched p");
    std::int64_t prod;
    const bool fits = !__builtin_mul_overflow(a.value(), b.value(), &prod) && prod < a.modulus();
    const bool exact = a.exact() && b.exact() && fits;
    const std::int64_t v = exact ? prod : mod_mul(a.value(), b.value(), a.modulus());
    return GammaElt(a.p(), v, exact, "(" + a.description() + ")*(" + b.description() + ")");
}

GammaElt gamma_pow(const GammaElt& a, std::int64_t m) {
    if (m < 0) {
        const std::int64_t inv = mod_inv(a.value(), a.modulus());
        return gamma_pow(GammaElt(a.p(), inv, false, "(" + a.description() + ")^-1"), -m);
    }
    GammaElt r(a.p(), 1, true, "1");
    for (std::int64_t i = 0; i < m; ++i) r = gamma_mul(r, a);
    return GammaElt(a.p(), r.value(), r.exact(), "(" + a.description() + ")^" + std::to_string(m));
}

// ---------------------------------------------------------------- ASeries

ASeries::ASeries(std::int64_t p, int N, std::map<std::int64_t, std::int64_t> coeffs, std::int64_t n_max,
                 std::optional<std::int64_t> n_min)
    : p_(p), N_(N), mod_(checked_level_modulus(p, N)), n_max_(n_max), n_min_(0) {
    for (auto& [n, c] : coeffs) {
        if (n > n_max_) continue;
        const std::int64_t r = mod_floor(c, mod_);
        if (r != 0) coeffs_.emplace(n, r);
    }
    const auto lo = low();
    if (n_min) {
        if (lo && *lo < *n_min) throw ParameterError("ASeries: support below the declared window");
        n_min_ = *n_min;
    } else {
        n_min_ = lo ? *lo : (n_max_ == kExact ? 0 : std::min<std::int64_t>(0, n_max_ + 1));
    }
}

ASeries ASeries::zero(std::int64_t p, int N, std::int64_t n_max) { return ASeries(p, N, {}, n_max); }
ASeries ASeries::one(std::int64_t p, int N) { return ASeries(p, N, {{0, 1}}); }
ASeries ASeries::constant(std::int64_t p, int N, std::int64_t c) { return ASeries(p, N, {{0, c}}); }
ASeries ASeries::monomial(std::int64_t p, int N, std::int64_t n, std::int64_t c) { return ASeries(p, N, {{n, c}}); }

std::int64_t ASeries::coeff(std::int64_t n) const {
    auto it = coeffs_.find(n);
    return it == coeffs_.end() ? 0 : it->second;
}

std::optional<std::int64_t> ASeries::low() const {
    if (coeffs_.empty()) return std::nullopt;
    return coeffs_.begin()->first;
}

ASeries ASeries::truncated(std::int64_t n) const {
    if (n >= n_max_) return *this;
    return ASeries(p_, N_, coeffs_, n, std::min(n_min_, n + 1));
}

ASeries ASeries::reduced(int k) const {
    if (k < 1 || k > N_) throw ParameterError("ASeries: bad reduction level");
    return ASeries(p_, k, coeffs_, n_max_, n_min_);
}

std::string ASeries::to_string() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [n, c] : coeffs_) {
        if (!first) os << " + ";
        os << c << "*pi^" << n;
        first = false;
    }
    if (first) os << "0";
    if (!is_exact()) os << " + O(pi^" << n_max_ + 1 << ")";
    os << " mod " << p_ << "^" << N_;
    return os.str();
}

namespace {

void require_same(const ASeries& a, const ASeries& b) {
    if (a.p() != b.p() || a.N() != b.N()) throw ParameterError("ASeries: mismatched p or level");
}

// Lowest index at which the true series can be nonzero; nullopt for an exact zero.
std::optional<std::int64_t> true_low(const ASeries& a) {
    if (auto lo = a.low()) return lo;
    if (a.is_exact()) return std::nullopt;
    return a.n_max() + 1;
}

}  // namespace

ASeries a_add(const ASeries& a, const ASeries& b) {
    require_same(a, b);
    auto c = a.coeffs();
    for (const auto& [n, v] : b.coeffs()) c[n] = mod_floor(c[n] + v, a.modulus());
    return ASeries(a.p(), a.N(), std::move(c), std::min(a.n_max(), b.n_max()), std::min(a.n_min(), b.n_min()));
}

ASeries a_neg(const ASeries& a) { return a_scale(a, -1); }

ASeries a_sub(const ASeries& a, const ASeries& b) { return a_add(a, a_neg(b)); }

ASeries a_scale(const ASeries& a, std::int64_t c) {
    std::map<std::int64_t, std::int64_t> out;
    const std::int64_t cc = mod_floor(c, a.modulus());
    for (const auto& [n, v] : a.coeffs()) out[n] = mod_mul(v, cc, a.modulus());
    return ASeries(a.p(), a.N(), std::move(out), a.n_max(), a.n_min());
}

ASeries a_mul(const ASeries& a, const ASeries& b) {
    require_same(a, b);
    const auto la = true_low(a), lb = true_low(b);
    if (!la || !lb) return ASeries::zero(a.p(), a.N());
    const std::int64_t top = std::min(sat_add(a.n_max(), *lb), sat_add(b.n_max(), *la));
    std::map<std::int64_t, std::int64_t> out;
    const std::int64_t m = a.modulus();
    for (const auto& [i, u] : a.coeffs())
        for (const auto& [j, v] : b.coeffs()) {
            if (i + j > top) break;
            auto& slot = out[i + j];
            slot = (slot + mod_mul(u, v, m)) % m;
        }
    std::int64_t nmin = a.n_min() + b.n_min();
    if (!out.empty()) nmin = std::min(nmin, out.begin()->first);
    return ASeries(a.p(), a.N(), std::move(out), top, std::min(nmin, top == kExact ? nmin : top + 1));
}

ASeries a_pow(const ASeries& a, std::int64_t k) {
    if (k < 0) return a_pow(a_inv(a), -k);
    ASeries r = ASeries::one(a.p(), a.N()), b = a;
    while (k > 0) {
        if (k & 1) r = a_mul(r, b);
        k >>= 1;
        if (k) b = a_mul(b, b);
    }
    return r;
}

ASeries a_inv(const ASeries& a, std::optional<std::int64_t> top) {
    const std::int64_t p = a.p(), m = a.modulus();
    std::optional<std::int64_t> v;
    for (const auto& [n, c] : a.coeffs())
        if (c % p != 0) {
            v = n;
            break;
        }
    if (!v) throw NonUnitError("a_inv: series is divisible by p at its precision");
    const std::int64_t cinv = mod_inv(a.coeff(*v), m);
    // w = a / (c pi^v) - 1
    std::map<std::int64_t, std::int64_t> wc;
    for (const auto& [n, c] : a.coeffs()) wc[n - *v] = mod_mul(c, cinv, m);
    wc[0] = mod_floor(wc[0] - 1, m);
    const ASeries w(p, a.N(), std::move(wc), a.is_exact() ? kExact : a.n_max() - *v);
    const auto scale_back = [&](const ASeries& s, std::int64_t out_top) {
        std::map<std::int64_t, std::int64_t> out;
        for (const auto& [n, c] : s.coeffs()) out[n - *v] = mod_mul(c, cinv, m);
        return ASeries(p, a.N(), std::move(out), out_top);
    };
    if (w.is_zero() && w.is_exact()) return scale_back(ASeries::one(p, a.N()), kExact);

    const std::int64_t lw = std::min<std::int64_t>(0, w.low().value_or(0));
    const bool has_positive = !w.coeffs().empty() && w.coeffs().rbegin()->first > 0;
    std::int64_t out_top = kExact;
    if (!a.is_exact()) out_top = a.n_max() + 2 * (-*v + (a.N() - 1) * lw);
    if (top) out_top = std::min(out_top, *top);
    if (a.is_exact() && has_positive && !top)
        throw PrecisionError("a_inv: exact input with an infinite inverse needs a window top");
    const std::int64_t inner = out_top == kExact ? kExact : out_top + *v;
    const std::int64_t work = out_top == kExact ? kExact : inner - (a.N() - 1) * lw;

    // Coefficients above work are dropped but the series stay exact; the slack absorbs the loss.
    const auto chop = [&](const ASeries& s) {
        if (work == kExact) return s;
        std::map<std::int64_t, std::int64_t> c(s.coeffs().begin(), s.coeffs().upper_bound(work));
        return ASeries(p, a.N(), std::move(c));
    };
    ASeries term = ASeries::one(p, a.N()), sum = ASeries::one(p, a.N());
    const ASeries negw = chop(ASeries(p, a.N(), a_neg(w).coeffs()));
    for (int iter = 0;; ++iter) {
        term = chop(a_mul(term, negw));
        if (term.is_zero()) break;
        sum = a_add(sum, term);
        if (iter > 100000) throw NonConvergenceError("a_inv: geometric series did not terminate");
    }
    return scale_back(sum.truncated(inner), out_top);
}

bool a_equal(const ASeries& a, const ASeries& b) {
    require_same(a, b);
    const std::int64_t top = std::min(a.n_max(), b.n_max());
    return a.truncated(top).coeffs() == b.truncated(top).coeffs();
}

bool a_identical(const ASeries& a, const ASeries& b) {
    return a.p() == b.p() && a.N() == b.N() && a.n_max() == b.n_max() && a.coeffs() == b.coeffs();
}

ASeries a_lift_level(const ASeries& a, int N, int shift) {
    if (shift < 0 || N > a.N() + shift) throw ParameterError("a_lift_level: target level not determined");
    const std::int64_t m = checked_level_modulus(a.p(), N);
    std::map<std::int64_t, std::int64_t> out;
    const std::int64_t ps = shift >= N ? 0 : ipow(a.p(), shift);
    for (const auto& [n, c] : a.coeffs()) out[n] = mod_mul(c % m, ps, m);
    return ASeries(a.p(), N, std::move(out), a.n_max(), a.n_min());
}

// ---------------------------------------------------------------- phi and gamma on A

namespace {

// Lowest index of phi(pi^m * f), f a power series, modulo p^N.
std::int64_t phi_index_bound(std::int64_t m, std::int64_t p, int N) {
    if (m >= 0) return m + (p - 1) * std::max<std::int64_t>(0, m - (N - 1));
    return p * m - (p - 1) * (N - 1);
}

}  // namespace

ASeries a_phi(const ASeries& x) {
    const std::int64_t p = x.p();
    const int N = x.N();
    std::int64_t out_top = kExact;
    if (!x.is_exact()) {
        if (x.n_max() + 1 > kExact / (2 * p)) throw PrecisionError("a_phi: window too large");
        out_top = phi_index_bound(x.n_max() + 1, p, N) - 1;
    }
    std::map<std::int64_t, std::int64_t> pc;
    {
        std::int64_t c = 1;
        for (std::int64_t k = 1; k <= p; ++k) {
            c = c * (p - k + 1) / k;
            pc[k] = c;
        }
    }
    const ASeries phipi(p, N, pc);
    ASeries out = ASeries::zero(p, N, out_top);
    if (x.is_zero()) return out;
    const std::int64_t hi = x.coeffs().rbegin()->first, lo = x.coeffs().begin()->first;
    if (hi >= 0) {
        ASeries pw = ASeries::one(p, N);
        for (std::int64_t n = 0; n <= hi; ++n) {
            if (n > 0) pw = a_mul(pw, phipi).truncated(out_top);
            if (const auto c = x.coeff(n)) out = a_add(out, a_scale(pw, c));
        }
    }
    if (lo < 0) {
        const ASeries inv = a_inv(phipi);
        ASeries pw = ASeries::one(p, N);
        for (std::int64_t n = -1; n >= lo; --n) {
            pw = a_mul(pw, inv);
            if (const auto c = x.coeff(n)) out = a_add(out, a_scale(pw, c));
        }
    }
    return ASeries(p, N, out.coeffs(), out_top);
}

ASeries a_gamma(const ASeries& x, const GammaElt& g, std::optional<std::int64_t> top) {
    const std::int64_t p = x.p();
    const int N = x.N();
    if (g.p() != p) throw ParameterError("a_gamma: mismatched p");
    if (x.is_zero()) return x;
    const std::int64_t lo = x.coeffs().begin()->first, hi = x.coeffs().rbegin()->first;
    std::int64_t out_top = x.n_max();
    if (top) out_top = std::min(out_top, *top);
    const bool finite_image = g.exact() && lo >= 0;
    if (out_top == kExact && !finite_image)
        throw PrecisionError("a_gamma: exact input with an infinite image needs a window top (e.g. " +
                             std::to_string(std::max<std::int64_t>(hi, 0) + 16) + ")");
    // u = gamma(pi) / pi, as a power series up to the degree needed.
    const std::int64_t deg = out_top == kExact ? (hi > 0 ? g.value() : 0) : out_top - lo;
    const auto bin = gamma_binomials(g, std::max<std::int64_t>(deg + 1, 1), N);
    std::map<std::int64_t, std::int64_t> uc;
    for (std::int64_t k = 1; k < static_cast<std::int64_t>(bin.size()); ++k) uc[k - 1] = bin[k];
    const ASeries u(p, N, std::move(uc), out_top == kExact ? kExact : deg);
    ASeries out = ASeries::zero(p, N, out_top);
    const auto rel = [&](std::int64_t n) { return out_top == kExact ? kExact : out_top - n; };
    if (hi >= 0) {
        ASeries pw = ASeries::one(p, N);
        for (std::int64_t n = 0; n <= hi; ++n) {
            if (n > 0) pw = a_mul(pw, u).truncated(rel(n));
            if (const auto c = x.coeff(n)) {
                std::map<std::int64_t, std::int64_t> sh;
                for (const auto& [k, v] : pw.coeffs()) sh[k + n] = mod_mul(v, c, x.modulus());
                out = a_add(out, ASeries(p, N, std::move(sh), sat_add(pw.n_max(), n)));
            }
        }
    }
    if (lo < 0) {
        const ASeries uinv = a_inv(u, rel(lo));
        ASeries pw = ASeries::one(p, N);
        for (std::int64_t n = -1; n >= lo; --n) {
            pw = a_mul(pw, uinv).truncated(rel(lo));
            if (const auto c = x.coeff(n)) {
                std::map<std::int64_t, std::int64_t> sh;
                for (const auto& [k, v] : pw.coeffs()) sh[k + n] = mod_mul(v, c, x.modulus());
                out = a_add(out, ASeries(p, N, std::move(sh), sat_add(pw.n_max(), n)));
            }
        }
    }
    return ASeries(p, N, out.coeffs(), out_top);
}

NegLog a_gauss_norm(const ASeries& x, const Q& r, const Q& scale) {
    if (r <= Q(0)) throw ParameterError("a_gauss_norm: r must be positive");
    std::optional<Q> best;
    for (const auto& [n, c] : x.coeffs()) {
        const Q v = Q(p_valuation(c, x.p())) + Q(n) * r * scale;
        if (!best || v < *best) best = v;
    }
    if (x.is_exact()) return best ? NegLog::finite(*best) : NegLog::infinite();
    const Q tail = Q(x.n_max() + 1) * r * scale;
    if (best && *best < tail) return NegLog::finite(*best);
    return NegLog::at_least(tail);
}

// ---------------------------------------------------------------- embedding into W(L)

namespace {

WittVec truncate_coords(const WittVec& x, const std::vector<std::int64_t>& precs) {
    std::vector<PerfSeries> c;
    for (int k = 0; k < x.N(); ++k) c.push_back(x.coord(k).truncated(precs[k]));
    return WittVec(x.field_ptr(), std::move(c));
}

WittVec drop_first(const WittVec& x) {
    std::vector<PerfSeries> c(x.coords().begin() + 1, x.coords().end());
    return WittVec(x.field_ptr(), std::move(c));
}

void require_prime_residue(const FieldPtr& F, std::int64_t p) {
    if (F->p() != p) throw ParameterError("mismatched p between series and field");
    if (F->fq.f() != 1) throw ParameterError("the imperfect period ring is implemented over F_p only");
}

}  // namespace

WittVec pi_witt(const FieldPtr& F, int N) {
    const PerfSeries one_t = ps_add(PerfSeries::one(F), PerfSeries::monomial(F, Q(1)));
    return w_sub(WittVec::teichmuller(one_t, N), WittVec::one(F, N));
}

WittVec embed_a_to_w(const ASeries& x, const FieldPtr& F) {
    require_prime_residue(F, x.p());
    const int N = x.N();
    std::vector<std::int64_t> precs(N, kExact);
    if (!x.is_exact())
        for (int k = 0; k < N; ++k) precs[k] = floor_div((x.n_max() + 1) * F->S, ipow(x.p(), k));
    WittVec out = WittVec::zero(F, N);
    if (x.is_zero()) return truncate_coords(out, precs);
    const WittVec P = pi_witt(F, N);
    const std::int64_t lo = x.coeffs().begin()->first, hi = x.coeffs().rbegin()->first;
    if (hi >= 0) {
        WittVec pw = WittVec::one(F, N);
        for (std::int64_t n = 0; n <= hi; ++n) {
            if (n > 0) pw = truncate_coords(w_mul(pw, P), precs);
            if (const auto c = x.coeff(n)) out = w_add(out, w_mul(WittVec::from_int(F, N, c), pw));
        }
    }
    if (lo < 0) {
        const WittVec Pinv = w_inv(P);
        WittVec pw = WittVec::one(F, N);
        for (std::int64_t n = -1; n >= lo; --n) {
            pw = w_mul(pw, Pinv);
            if (const auto c = x.coeff(n)) out = w_add(out, w_mul(WittVec::from_int(F, N, c), pw));
        }
    }
    return truncate_coords(out, precs);
}

Q lift_radius(const FieldPtr& F, int N) {
    const WittVec d = w_sub(pi_witt(F, N), WittVec::teichmuller(PerfSeries::monomial(F, Q(1)), N));
    Q r(1);
    for (int i = 0; i < 40; ++i, r /= 2) {
        const NegLog g = gauss_norm(d, r);
        const Q lead = r * F->scale;
        if (g.kind == NegLog::Kind::Infinite || g.value > lead) return r;
    }
    throw InternalError("lift_radius: no admissible radius");
}

PerfSeries one_plus_t_pow(const FieldPtr& F, const Q& e) {
    if (e < Q(0)) throw ParameterError("one_plus_t_pow: negative exponent");
    const std::int64_t p = F->p();
    const int k = p_denominator_exponent(e, p);
    if (k > F->M) throw ParameterError("one_plus_t_pow: denominator exceeds p^M");
    const std::int64_t a = e.numerator();
    std::vector<PerfSeries::Term> terms;
    const std::int64_t step = F->S / ipow(p, k);
    for (std::int64_t j = 0; j <= a; ++j) {
        const std::int64_t c = lucas(a, j, p);
        if (c) terms.emplace_back(j * step, F->fq.from_int(c));
    }
    return PerfSeries(F, std::move(terms), kExact);
}

WittVec embed_t_to_w(const TElt& z, const FieldPtr& F, int N) {
    WittVec out = WittVec::zero(F, N);
    for (const auto& [e, a] : z) {
        if (a.N() != N) throw ParameterError("embed_t_to_w: component level mismatch");
        out = w_add(out, w_mul(WittVec::teichmuller(one_plus_t_pow(F, e), N), embed_a_to_w(a, F)));
    }
    return out;
}

// ---------------------------------------------------------------- gamma on L

namespace {

using Dense = std::vector<std::int64_t>;

Dense dmul(const Dense& a, const Dense& b, std::size_t len, std::int64_t p) {
    Dense r(std::min(len, a.size() + b.size()), 0);
    for (std::size_t i = 0; i < a.size() && i < r.size(); ++i) {
        if (!a[i]) continue;
        const std::size_t lim = std::min(b.size(), r.size() - i);
        for (std::size_t j = 0; j < lim; ++j) r[i + j] += a[i] * b[j];
        if ((i & 63) == 63)
            for (auto& v : r) v %= p;
    }
    for (auto& v : r) v %= p;
    r.resize(len, 0);
    return r;
}

Dense dinv(const Dense& a, std::size_t len, std::int64_t p) {
    Dense r(len, 0);
    if (len == 0) return r;
    const std::int64_t i0 = mod_inv(a.at(0), p);
    r[0] = i0;
    for (std::size_t n = 1; n < len; ++n) {
        std::int64_t s = 0;
        for (std::size_t j = 1; j <= n && j < a.size(); ++j) s = (s + a[j] * r[n - j]) % p;
        r[n] = mod_floor(-s * i0, p);
    }
    return r;
}

Dense dpow(Dense a, std::int64_t e, std::size_t len, std::int64_t p) {
    Dense r(len, 0);
    if (len) r[0] = 1;
    a.resize(len, 0);
    while (e > 0) {
        if (e & 1) r = dmul(r, a, len, p);
        e >>= 1;
        if (e) a = dmul(a, a, len, p);
    }
    return r;
}

Dense dfrob(const Dense& a, std::size_t len, std::int64_t p) {
    Dense r(len, 0);
    for (std::size_t i = 0; i < a.size() && i * p < len; ++i) r[i * p] = a[i];
    return r;
}

// Coefficients of (1 + t)^gamma - 1 divided by t, i.e. C(gamma, j + 1), j < len.
Dense gamma_h(const GammaElt& g, std::size_t len) {
    const std::int64_t p = g.p();
    Dense h(len, 0);
    int need = 0;
    for (std::int64_t v = 1; v <= static_cast<std::int64_t>(len); v *= p) ++need;
    std::vector<int> dg;
    for (int i = 0; i <= need; ++i) dg.push_back(g.digit(i));
    for (std::size_t j = 0; j < len; ++j) {
        std::int64_t m = static_cast<std::int64_t>(j) + 1, r = 1;
        for (int i = 0; m > 0; ++i, m /= p) {
            r = r * small_binom_mod(dg.at(i), m % p, p) % p;
            if (!r) break;
        }
        h[j] = r;
    }
    return h;
}

struct GammaCtx {
    std::int64_t p;
    Dense h;                  // gamma(t) / t
    std::vector<Dense> gpow;  // g^0 .. g^{p-1} at full length
};

// B(g) mod t^len for g = t h.
Dense eval_at_g(const Dense& Bin, std::size_t len, const GammaCtx& ctx) {
    const std::int64_t p = ctx.p;
    Dense B(Bin.begin(), Bin.begin() + std::min(Bin.size(), len));
    if (len == 0 || B.empty()) return Dense(len, 0);
    Dense g(len, 0);
    for (std::size_t j = 1; j < len; ++j) g[j] = ctx.h[j - 1];
    if (B.size() <= 24) {
        Dense acc(len, 0);
        for (std::size_t i = B.size(); i-- > 0;) {
            acc = dmul(acc, g, len, p);
            acc[0] = (acc[0] + B[i]) % p;
        }
        return acc;
    }
    const std::size_t sub = (len + p - 1) / p;
    Dense acc(len, 0), gr(len, 0);
    gr[0] = 1;
    for (std::int64_t r = 0; r < p; ++r) {
        Dense Br;
        for (std::size_t i = r; i < B.size(); i += p) Br.push_back(B[i]);
        if (r > 0) gr = dmul(gr, g, len, p);
        if (Br.empty()) continue;
        const Dense part = dmul(gr, dfrob(eval_at_g(Br, sub, ctx), len, p), len, p);
        for (std::size_t i = 0; i < len; ++i) acc[i] = (acc[i] + part[i]) % p;
    }
    return acc;
}

// gamma(a) mod t^prec, treating the stored terms of a as exact.
PerfSeries gamma_series(const PerfSeries& a, const GammaElt& g, std::int64_t prec) {
    const FieldPtr& F = a.field_ptr();
    const std::int64_t p = F->p(), S = F->S;
    std::map<int, std::vector<std::pair<std::int64_t, std::int64_t>>> groups;  // k -> (n, c)
    for (const auto& [E, c] : a.terms()) {
        if (E >= prec) break;
        int k = F->M;
        std::int64_t n = E;
        while (k > 0 && n % p == 0) {
            n /= p;
            --k;
        }
        groups[k].emplace_back(n, F->fq.to_prime(c));
    }
    std::vector<PerfSeries::Term> out_terms;
    std::map<std::int64_t, std::int64_t> acc;
    for (const auto& [k, terms] : groups) {
        const std::int64_t unit = S / ipow(p, k);  // scaled size of t^{1/p^k}
        const std::int64_t lo = terms.front().first;
        const std::int64_t pk_abs = ceil_div(prec, unit);
        if (pk_abs <= lo) continue;
        const std::size_t len = static_cast<std::size_t>(pk_abs - lo);
        GammaCtx ctx{p, gamma_h(g, len + 1), {}};
        Dense B(len, 0);
        for (const auto& [n, c] : terms)
            if (n - lo < static_cast<std::int64_t>(len)) B[n - lo] = c;
        Dense core = eval_at_g(B, len, ctx);
        Dense hh(ctx.h.begin(), ctx.h.begin() + len);
        const Dense hl = lo >= 0 ? dpow(hh, lo, len, p) : dpow(dinv(hh, len, p), -lo, len, p);
        core = dmul(core, hl, len, p);
        for (std::size_t i = 0; i < len; ++i)
            if (core[i]) {
                const std::int64_t E = (lo + static_cast<std::int64_t>(i)) * unit;
                if (E < prec) acc[E] = (acc[E] + core[i]) % p;
            }
    }
    for (const auto& [E, c] : acc)
        if (c) out_terms.emplace_back(E, F->fq.from_int(c));
    return PerfSeries(F, std::move(out_terms), prec);
}

std::int64_t working_prec(const PerfSeries& a) {
    if (!a.is_exact()) return a.prec_scaled();
    return a.val_scaled().value_or(0) + q_floor(a.field().e_max * a.field().S);
}

bool integral_exponents(const PerfSeries& a) {
    for (const auto& [E, c] : a.terms())
        if (E % a.field().S != 0) return false;
    return true;
}

}  // namespace

PerfSeries l_gamma(const PerfSeries& a, const GammaElt& g) {
    if (g.p() != a.field().p()) throw ParameterError("l_gamma: mismatched p");
    if (a.field().fq.f() != 1) throw ParameterError("l_gamma: implemented over F_p only");
    if (g.is_one() || a.is_zero()) return a;
    if (g.exact() && a.is_exact()) {
        const std::int64_t lo = a.terms().front().first, hi = a.terms().back().first;
        std::int64_t bound;
        if (lo >= 0 && !__builtin_mul_overflow(hi + a.field().S, g.value(), &bound) && bound < 4096 * a.field().S) {
            const PerfSeries r = gamma_series(a, g, bound + 1);
            return PerfSeries(a.field_ptr(), r.terms(), kExact);
        }
    }
    return gamma_series(a, g, working_prec(a));
}

WittVec w_gamma(const WittVec& x, const GammaElt& g) {
    std::vector<PerfSeries> c;
    for (const auto& a : x.coords()) c.push_back(l_gamma(a, g));
    return WittVec(x.field_ptr(), std::move(c));
}

PerfSeries l_gamma_minus_one_int(const PerfSeries& a, const GammaElt& g) {
    if (!integral_exponents(a)) throw ParameterError("l_gamma_minus_one_int: exponents must be integers");
    const auto v = g.v_minus_one();
    if (!v) return PerfSeries::zero(a.field_ptr());
    if (a.is_zero()) {
        if (a.is_exact()) return a;
    }
    const std::int64_t S = a.field().S;
    std::int64_t gain;
    if (__builtin_mul_overflow(ipow(a.field().p(), std::min(*v, 40)) - 1, S, &gain)) gain = kExact / 4;
    std::int64_t prec;
    if (a.is_exact()) {
        if (g.exact()) {
            const PerfSeries ga = l_gamma(a, g);
            if (ga.is_exact()) return ps_sub(ga, a);
        }
        prec = prec_add(working_prec(a), gain);
    } else {
        prec = prec_add(a.prec_scaled(), gain);
    }
    const PerfSeries known(a.field_ptr(), a.terms(), kExact);
    return ps_sub(gamma_series(known, g, prec), known).truncated(prec);
}

GammaGap gamma_contraction_check(const PerfSeries& a, int n, const GammaElt& g) {
    if (n < 1) throw ParameterError("gamma_contraction_check: n must be positive");
    const auto v = g.v_minus_one();
    GammaGap out;
    out.bound = Q(ipow(a.field().p(), n));
    if (v && *v < n) throw ParameterError("gamma_contraction_check: gamma is not in 1 + p^n Z_p");
    if (!v || a.is_zero()) {
        out.gap = NegLog::infinite();
        out.meets_bound = true;
        return out;
    }
    const PerfSeries d = integral_exponents(a) ? l_gamma_minus_one_int(a, g) : ps_sub(l_gamma(a, g), a);
    const Q va = a.from_scaled(*a.val_scaled());
    if (d.is_zero())
        out.gap = d.is_exact() ? NegLog::infinite() : NegLog::at_least(d.from_scaled(d.prec_scaled()) - va);
    else
        out.gap = NegLog::finite(d.from_scaled(*d.val_scaled()) - va);
    out.meets_bound = out.gap.certifies(out.bound);
    return out;
}

// ---------------------------------------------------------------- decomposition mod p

ModpDecomposition decompose_modp(const PerfSeries& x, int m) {
    const FieldPtr& F = x.field_ptr();
    const std::int64_t p = F->p(), S = F->S;
    if (F->fq.f() != 1) throw ParameterError("decompose_modp: implemented over F_p only");
    if (m < 0 || m > F->M) throw ParameterError("decompose_modp: m out of range");
    const std::int64_t pm = ipow(p, m), q = S / pm;
    std::vector<std::vector<PerfSeries::Term>> y(pm);
    for (const auto& [E, c] : x.terms()) {
        if (E % q != 0) throw ParameterError("decompose_modp: exponent denominator exceeds p^m");
        const std::int64_t g = mod_floor(E / q, pm);
        y[g].emplace_back(E - g * q, c);
    }
    std::vector<PerfSeries> ys;
    for (std::int64_t g = 0; g < pm; ++g) {
        const std::int64_t pr = x.is_exact() ? kExact : ceil_div(x.prec_scaled() - g * q, S) * S;
        ys.emplace_back(F, std::move(y[g]), pr);
    }
    ModpDecomposition out{PerfSeries::zero(F), {}};
    for (std::int64_t h = 0; h < pm; ++h) {
        PerfSeries acc = PerfSeries::zero(F);
        for (std::int64_t g = h; g < pm; ++g) {
            std::int64_t c = lucas(g, h, p);
            if ((g - h) % 2 == 1) c = mod_floor(-c, p);
            if (c) acc = ps_add(acc, ps_scale(ys[g], F->fq.from_int(c)));
        }
        if (h == 0)
            out.integral = acc;
        else if (!acc.is_exact_zero())
            out.parts.emplace(Q(h, pm), acc);
    }
    return out;
}

PerfSeries tbar_to_series(const TBarElt& t, const FieldPtr& F) {
    PerfSeries acc = PerfSeries::zero(F);
    for (const auto& [e, a] : t) acc = ps_add(acc, ps_mul(one_plus_t_pow(F, e), a));
    return acc;
}

PerfSeries recompose_modp(const ModpDecomposition& d) {
    return ps_add(d.integral, tbar_to_series(d.parts, d.integral.field_ptr()));
}

namespace {

int max_denominator_exponent(const PerfSeries& x) {
    const std::int64_t p = x.field().p();
    int m = 0;
    for (const auto& [E, c] : x.terms()) {
        if (E == 0) continue;
        m = std::max(m, x.field().M - std::min(p_valuation(E, p), x.field().M));
    }
    return m;
}

// (1 + t)^delta - 1 as an integer-exponent series mod t^len, delta = num * (gp - 1) / p^k.
PerfSeries one_plus_t_padic_minus_one(const FieldPtr& F, const GammaElt& gp, int k, std::int64_t num,
                                      std::int64_t len) {
    const std::int64_t p = F->p();
    // digits of delta = (gp - 1) / p^k * num modulo p^{L - k}
    const std::int64_t modL = gp.modulus();
    const std::int64_t base = mod_floor(gp.value() - 1, modL) / ipow(p, k);
    const int Lk = gp.level() - k;
    const std::int64_t modk = ipow(p, Lk);
    const std::int64_t delta = mod_mul(base % modk, mod_floor(num, modk), modk);
    const bool exact = gp.exact();
    std::vector<PerfSeries::Term> terms;
    for (std::int64_t j = 1; j < len; ++j) {
        std::int64_t m = j, d = delta, r = 1;
        int i = 0;
        for (; m > 0; ++i, m /= p, d /= p) {
            if (i >= Lk && !exact) throw PrecisionError("gamma inverse: p-adic level too small for the window");
            r = r * small_binom_mod(d % p, m % p, p) % p;
            if (!r) break;
        }
        if (r) terms.emplace_back(j * F->S, F->fq.from_int(r));
    }
    return PerfSeries(F, std::move(terms), len * F->S);
}

}  // namespace

GammaInverse invert_gamma_minus1_modp(const TBarElt& t, const GammaElt& g, const FieldPtr& F) {
    if (g.is_one()) throw ParameterError("invert_gamma_minus1_modp: gamma = 1");
    if (g.p() != F->p()) throw ParameterError("invert_gamma_minus1_modp: mismatched p");
    GammaInverse out;
    out.residual = NegLog::infinite();
    if (t.empty()) return out;
    const std::int64_t p = F->p(), S = F->S;
    int m_max = 1;
    for (const auto& [e, a] : t) {
        if (!(e > Q(0) && e < Q(1))) throw ParameterError("invert_gamma_minus1_modp: component outside (0,1)");
        if (!integral_exponents(a)) throw ParameterError("invert_gamma_minus1_modp: component not in F_p((t))");
        m_max = std::max(m_max, p_denominator_exponent(e, p));
    }
    const int n_req = std::max(m_max, p == 2 ? 2 : 1);
    GammaElt gp = g;
    int mpow = 1;
    for (;; ++mpow) {
        gp = gamma_pow(g, mpow);
        const auto v = gp.v_minus_one();
        if (!v) throw ParameterError("invert_gamma_minus1_modp: gamma has finite order at the stored level");
        if (*v >= n_req) break;
        if (mpow > 100000) throw NonConvergenceError("invert_gamma_minus1_modp: no power reaches 1 + p^n");
    }
    const int nprime = *gp.v_minus_one();
    out.power = mpow;
    out.contraction_level = nprime;

    TBarElt w;
    for (const auto& [e, te] : t) {
        const int me = p_denominator_exponent(e, p);
        const std::int64_t de = ipow(p, nprime - me);  // valuation of E - 1
        const std::int64_t Pt = working_prec(te);
        const std::int64_t vt = te.is_zero() ? Pt : *te.val_scaled();
        const std::int64_t rel = std::max<std::int64_t>(Pt - std::min(vt, Pt), S);
        const std::int64_t len = de + ceil_div(rel, S) + 1;
        const PerfSeries Em1 = one_plus_t_padic_minus_one(F, gp, me, e.numerator(), len);
        const PerfSeries Einv = ps_inv(Em1);
        const PerfSeries E = ps_add(Em1, PerfSeries::one(F));
        const std::int64_t target = Pt - de * S;
        const PerfSeries te_w = te.is_exact() ? te.truncated(Pt) : te;
        PerfSeries x = ps_mul(Einv, te_w).truncated(target);
        int it = 0;
        for (;; ++it) {
            const PerfSeries corr = ps_mul(E, l_gamma_minus_one_int(x, gp));
            const PerfSeries nx = ps_mul(Einv, ps_sub(te_w, corr)).truncated(target);
            if (ps_identical(nx, x)) break;
            x = nx;
            if (it > 4 * (target - std::min(vt, target)) / S + 64)
                throw NonConvergenceError("invert_gamma_minus1_modp: iteration did not stabilize");
        }
        out.iterations = std::max(out.iterations, it + 1);
        w.emplace(e, x);
    }
    const PerfSeries wL = tbar_to_series(w, F);
    PerfSeries zL = PerfSeries::zero(F);
    for (int i = 0; i < mpow; ++i) zL = ps_add(zL, i == 0 ? wL : l_gamma(wL, gamma_pow(g, i)));
    const ModpDecomposition dec = decompose_modp(zL, m_max);
    if (!dec.integral.is_zero()) throw InternalError("invert_gamma_minus1_modp: result left the T component");
    out.z = dec.parts;
    bool exact_input = g.exact();
    for (const auto& [e, a] : t) exact_input = exact_input && a.is_exact();
    if (exact_input) {
        TBarElt ze;
        for (const auto& [e, a] : out.z) ze.emplace(e, PerfSeries(F, a.terms(), kExact));
        const PerfSeries zs = tbar_to_series(ze, F);
        if (ps_sub(ps_sub(l_gamma(zs, g), zs), tbar_to_series(t, F)).is_exact_zero()) {
            out.z = std::move(ze);
            return out;
        }
    }
    const PerfSeries zr = tbar_to_series(out.z, F);
    const PerfSeries res = ps_sub(ps_sub(l_gamma(zr, g), zr), tbar_to_series(t, F));
    out.residual = ps_val(res).neglog();
    return out;
}

// ---------------------------------------------------------------- lifts and splitting

GoodLift good_lift(const PerfSeries& a, int N) {
    const FieldPtr& F = a.field_ptr();
    require_prime_residue(F, F->p());
    if (!integral_exponents(a)) throw ParameterError("good_lift: exponents must be integers");
    const std::int64_t p = F->p(), S = F->S;
    const std::int64_t modN = checked_level_modulus(p, N);
    std::map<std::int64_t, std::int64_t> c;
    for (const auto& [E, v] : a.terms()) c[E / S] = mod_pow(F->fq.to_prime(v), ipow(p, N - 1), modN);
    const std::int64_t n_max = a.is_exact() ? kExact : ceil_div(a.prec_scaled(), S) - 1;
    ASeries lift(p, N, std::move(c), n_max);
    WittVec emb = embed_a_to_w(lift, F);
    GoodLift out{lift, emb, std::nullopt};
    if (a.is_zero()) return out;
    const WittVec diff = w_sub(emb, WittVec::teichmuller(a, N));
    const Q va = a.from_scaled(*a.val_scaled());
    Q r(1);
    for (int i = 0; i < 40; ++i, r /= 2) {
        const NegLog d = gauss_norm(diff, r);
        const Q lead = r * F->scale * va;
        if (d.kind == NegLog::Kind::Infinite || d.value > lead) {
            out.r0 = r;
            break;
        }
    }
    return out;
}

WittVec split_reassemble(const ASeries& y, const TElt& z, const GammaElt& g, const FieldPtr& F, int N) {
    const WittVec Z = embed_t_to_w(z, F, N);
    return w_add(embed_a_to_w(y, F), w_sub(w_gamma(Z, g), Z));
}

namespace {

// p^j x for x in W_{N-j}(L), as an element of W_N(L).
WittVec raise_level(const WittVec& x, int N, int j) {
    std::vector<PerfSeries> c(N, PerfSeries::zero(x.field_ptr()));
    for (int n = j; n < N && n - j < x.N(); ++n) c[n] = x.coord(n - j);
    return WittVec(x.field_ptr(), std::move(c));
}

}  // namespace

SplitResult split_lift(const WittVec& x, const GammaElt& g) {
    const FieldPtr& F = x.field_ptr();
    require_prime_residue(F, g.p());
    const std::int64_t p = F->p();
    const int N = x.N();
    ASeries y = ASeries::zero(p, N);
    TElt z;
    WittVec y_w = WittVec::zero(F, N), z_w = WittVec::zero(F, N);
    WittVec cur = x;
    for (int j = 0; j < N; ++j) {
        const int Nj = N - j;
        const PerfSeries& xb = cur.coord(0);
        const ModpDecomposition dec = decompose_modp(xb, max_denominator_exponent(xb));
        TBarElt zb;
        if (!dec.parts.empty()) zb = invert_gamma_minus1_modp(dec.parts, g, F).z;
        const GoodLift gl = good_lift(dec.integral, Nj);
        TElt zj;
        for (const auto& [e, a] : zb) zj.emplace(e, good_lift(a, Nj).lift);
        const WittVec Lz = embed_t_to_w(zj, F, Nj);
        const WittVec diff = w_sub(w_sub(cur, gl.embedded), w_sub(w_gamma(Lz, g), Lz));
        if (!diff.coord(0).is_zero()) throw InternalError("split_lift: residue not cancelled at level " + std::to_string(j));
        y = a_add(y, a_lift_level(gl.lift, N, j));
        y_w = w_add(y_w, raise_level(gl.embedded, N, j));
        z_w = w_add(z_w, raise_level(Lz, N, j));
        for (const auto& [e, a] : zj) {
            const ASeries lifted = a_lift_level(a, N, j);
            auto it = z.find(e);
            if (it == z.end())
                z.emplace(e, lifted);
            else
                it->second = a_add(it->second, lifted);
        }
        if (Nj > 1) cur = drop_first(diff);
    }
    SplitResult out{y, z, y_w, z_w, NegLog::infinite(), false};
    const WittVec resid = w_sub(w_sub(x, y_w), w_sub(w_gamma(z_w, g), z_w));
    out.residual = gauss_norm(resid, Q(1));
    out.certified = resid.is_zero();
    return out;
}

}  // namespace perfectoid
