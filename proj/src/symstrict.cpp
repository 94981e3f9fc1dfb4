#include "perfectoid/symstrict.hpp"

#include "perfectoid/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace perfectoid {

namespace {

void require_compatible(const SymElt& a, const SymElt& b) {
    if (a.p() != b.p() || a.N() != b.N() || a.E() != b.E() || a.nvars() != b.nvars())
        throw ParameterError("SymElt: mismatched ring parameters");
}

}  // namespace

SymElt::SymElt(std::int64_t p, int N, int E, int nvars) : p_(p), N_(N), E_(E), nvars_(nvars) {
    if (!is_prime(p)) throw ParameterError("SymElt: p must be prime");
    if (N < 1 || E < 0 || nvars < 1) throw ParameterError("SymElt: invalid parameters");
    mod_ = ipow(p, N);
    if (mod_ > (std::int64_t{1} << 31)) throw ParameterError("SymElt: p^N too large");
}

SymElt SymElt::constant(std::int64_t p, int N, int E, int nvars, std::int64_t c) {
    SymElt s(p, N, E, nvars);
    s.add_term(Mono(nvars, 0), c);
    return s;
}

SymElt SymElt::monomial(std::int64_t p, int N, int E, const std::vector<Q>& e, std::int64_t c) {
    SymElt s(p, N, E, static_cast<int>(e.size()));
    const std::int64_t scale = ipow(p, E);
    Mono m;
    for (const auto& x : e) {
        const Q v = x * scale;
        if (v.denominator() != 1) throw PrecisionError("SymElt: exponent exceeds the denominator bound");
        m.push_back(v.numerator());
    }
    s.add_term(m, c);
    return s;
}

void SymElt::add_term(const Mono& m, std::int64_t c) {
    if (static_cast<int>(m.size()) != nvars_) throw ParameterError("SymElt: monomial arity mismatch");
    c = mod_floor(c, mod_);
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second = (it->second + c) % mod_;
        if (it->second == 0) terms_.erase(it);
    }
}

std::vector<Q> SymElt::exponents(const Mono& m) const {
    const std::int64_t scale = ipow(p_, E_);
    std::vector<Q> out;
    for (auto e : m) out.emplace_back(e, scale);
    return out;
}

SymElt SymElt::reduced(int n) const {
    if (n > N_ || n < 1) throw ParameterError("SymElt: cannot raise the modulus");
    SymElt s(p_, n, E_, nvars_);
    for (const auto& [m, c] : terms_) s.add_term(m, c);
    return s;
}

std::string SymElt::to_string(const std::vector<std::string>& names) const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << c;
        auto e = exponents(m);
        for (int i = 0; i < nvars_; ++i) {
            if (e[i] == 0) continue;
            os << "*" << (i < static_cast<int>(names.size()) ? names[i] : "x" + std::to_string(i)) << "^"
               << q_to_string(e[i]);
        }
    }
    if (first) os << "0";
    return os.str();
}

bool SymElt::operator==(const SymElt& o) const {
    return p_ == o.p_ && N_ == o.N_ && E_ == o.E_ && nvars_ == o.nvars_ && terms_ == o.terms_;
}

SymElt sym_add(const SymElt& a, const SymElt& b) {
    require_compatible(a, b);
    SymElt s = a;
    for (const auto& [m, c] : b.terms()) s.add_term(m, c);
    return s;
}

SymElt sym_scale(const SymElt& a, std::int64_t c) {
    SymElt s(a.p(), a.N(), a.E(), a.nvars());
    c = mod_floor(c, a.modulus());
    for (const auto& [m, x] : a.terms()) s.add_term(m, static_cast<std::int64_t>((__int128)x * c % a.modulus()));
    return s;
}

SymElt sym_sub(const SymElt& a, const SymElt& b) { return sym_add(a, sym_scale(b, -1)); }

SymElt sym_mul(const SymElt& a, const SymElt& b, std::size_t term_limit) {
    require_compatible(a, b);
    SymElt s(a.p(), a.N(), a.E(), a.nvars());
    SymElt::Mono m(a.nvars());
    for (const auto& [ma, ca] : a.terms()) {
        for (const auto& [mb, cb] : b.terms()) {
            for (int i = 0; i < a.nvars(); ++i) m[i] = ma[i] + mb[i];
            s.add_term(m, static_cast<std::int64_t>((__int128)ca * cb % a.modulus()));
        }
        if (s.terms().size() > term_limit)
            throw OracleTooLargeError("symbolic oracle exceeded the term limit of " + std::to_string(term_limit));
    }
    return s;
}

SymElt sym_div_p(const SymElt& a) {
    if (a.N() < 2) throw InternalError("sym_div_p: nothing left to divide");
    SymElt s(a.p(), a.N() - 1, a.E(), a.nvars());
    for (const auto& [m, c] : a.terms()) {
        if (c % a.p() != 0) throw InternalError("sym_div_p: inexact division by p");
        s.add_term(m, c / a.p());
    }
    return s;
}

SymElt sym_power_lift(const SymElt& root, int N, std::size_t term_limit) {
    SymElt cur = root.N() == N ? root : root.reduced(N);
    for (int k = 0; k + 1 < N; ++k) {
        SymElt acc = SymElt::constant(cur.p(), N, cur.E(), cur.nvars(), 1);
        SymElt base = cur;
        for (std::int64_t e = cur.p(); e > 0; e >>= 1) {
            if (e & 1) acc = sym_mul(acc, base, term_limit);
            if (e > 1) base = sym_mul(base, base, term_limit);
        }
        cur = std::move(acc);
    }
    return cur;
}

SymElt sym_teich_lift(const SymElt& xbar, int N, std::size_t term_limit) {
    const std::int64_t p = xbar.p();
    const std::int64_t d = ipow(p, N - 1);
    SymElt root(p, N, xbar.E(), xbar.nvars());
    for (const auto& [m, c] : xbar.terms()) {
        SymElt::Mono r(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i] % d != 0) throw PrecisionError("sym_teich_lift: root exponent exceeds the denominator bound");
            r[i] = m[i] / d;
        }
        root.add_term(r, mod_floor(c, p));
    }
    return sym_power_lift(root, N, term_limit);
}

std::vector<SymElt> sym_coords(const SymElt& z, std::size_t term_limit) {
    std::vector<SymElt> out;
    SymElt cur = z;
    const int N = z.N();
    for (int n = 0; n < N; ++n) {
        SymElt xn = cur.reduced(1);
        if (n + 1 < N) cur = sym_div_p(sym_sub(cur, sym_teich_lift(xn, cur.N(), term_limit)));
        out.push_back(std::move(xn));
    }
    return out;
}

namespace {

SymElt assemble(const std::vector<SymElt>& x, int N, std::size_t term_limit) {
    const auto& ref = x.front();
    SymElt acc(ref.p(), N, ref.E(), ref.nvars());
    std::int64_t pn = 1;
    for (int n = 0; n < N; ++n, pn *= ref.p()) {
        if (n >= static_cast<int>(x.size()) || x[n].is_zero()) continue;
        SymElt t = sym_teich_lift(x[n].reduced(1), N - n, term_limit);
        for (const auto& [m, c] : t.terms()) acc.add_term(m, c * pn);
    }
    return acc;
}

}  // namespace

std::vector<SymElt> sym_witt_op(const std::vector<SymElt>& x, const std::vector<SymElt>& y, SymOp op,
                                std::size_t term_limit) {
    if (x.empty() || y.empty()) throw ParameterError("sym_witt_op: empty coordinate list");
    const int N = static_cast<int>(std::max(x.size(), y.size()));
    SymElt a = assemble(x, N, term_limit), b = assemble(y, N, term_limit);
    SymElt z = op == SymOp::Add ? sym_add(a, b) : sym_mul(a, b, term_limit);
    return sym_coords(z, term_limit);
}

SymElt sym_from_series(const PerfSeries& s, int E) {
    const Field& F = s.field();
    if (F.fq.f() != 1) throw ParameterError("sym_from_series: only prime residue fields are supported");
    if (!s.is_exact()) throw ParameterError("sym_from_series: series must be exact");
    if (E < F.M) throw ParameterError("sym_from_series: scale below the field denominator bound");
    const std::int64_t up = ipow(F.p(), E - F.M);
    SymElt out(F.p(), 1, E, 1);
    for (const auto& [e, c] : s.terms()) out.add_term({e * up}, F.fq.to_prime(c));
    return out;
}

PerfSeries sym_to_series(const SymElt& s, const FieldPtr& F) {
    if (s.nvars() != 1) throw ParameterError("sym_to_series: one variable expected");
    if (F->fq.f() != 1 || F->p() != s.p()) throw ParameterError("sym_to_series: field mismatch");
    SymElt r = s.reduced(1);
    std::vector<PerfSeries::Term> t;
    for (const auto& [m, c] : r.terms()) {
        const Q e(m[0], ipow(s.p(), s.E()));
        t.emplace_back(PerfSeries(F).to_scaled(e), F->fq.from_int(c));
    }
    return PerfSeries(F, std::move(t), kExact);
}

CarryTable build_carry_table(std::int64_t p, int N, int max_N) {
    if (!is_prime(p)) throw ParameterError("carry table: p must be prime");
    if (N < 1) throw ParameterError("carry table: N must be positive");
    if (N > max_N) {
        const double est = std::pow(static_cast<double>(p), 2.0 * (N - 1));
        throw ParameterError("carry table: N=" + std::to_string(N) + " exceeds the cap " + std::to_string(max_N) +
                             " (estimated term count ~" + std::to_string(static_cast<long long>(est)) + ")");
    }
    const int E = N - 1;
    SymElt x = SymElt::monomial(p, 1, E, {Q(1), Q(0)});
    SymElt y = SymElt::monomial(p, 1, E, {Q(0), Q(1)});
    SymElt z = sym_add(sym_teich_lift(x, N, SIZE_MAX), sym_teich_lift(y, N, SIZE_MAX));
    CarryTable t;
    t.p = p;
    t.N = N;
    for (const auto& poly : sym_coords(z, SIZE_MAX)) {
        std::vector<CarryTerm> terms;
        for (const auto& [m, c] : poly.terms()) {
            auto e = poly.exponents(m);
            terms.push_back({e[0], e[1], c});
        }
        t.polys.push_back(std::move(terms));
    }
    return t;
}

std::string carry_table_to_json(const CarryTable& t) {
    nlohmann::json j;
    j["p"] = t.p;
    j["N"] = t.N;
    j["kind"] = "add";
    j["version"] = 1;
    j["polys"] = nlohmann::json::array();
    for (const auto& poly : t.polys) {
        auto arr = nlohmann::json::array();
        for (const auto& term : poly)
            arr.push_back({{"ex", q_to_string(term.ex)}, {"ey", q_to_string(term.ey)}, {"c", term.c}});
        j["polys"].push_back(std::move(arr));
    }
    return j.dump(1) + "\n";
}

CarryTable carry_table_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("carry table: ") + e.what());
    }
    try {
        if (j.at("kind").get<std::string>() != "add") throw SchemaError("carry table: unsupported kind");
        if (j.at("version").get<int>() != 1) throw SchemaError("carry table: unsupported version");
        CarryTable t;
        t.p = j.at("p").get<std::int64_t>();
        t.N = j.at("N").get<int>();
        for (const auto& poly : j.at("polys")) {
            std::vector<CarryTerm> terms;
            for (const auto& term : poly)
                terms.push_back({q_parse(term.at("ex").get<std::string>()), q_parse(term.at("ey").get<std::string>()),
                                 term.at("c").get<std::int64_t>()});
            t.polys.push_back(std::move(terms));
        }
        if (!is_prime(t.p) || t.N < 1 || static_cast<int>(t.polys.size()) != t.N)
            throw SchemaError("carry table: inconsistent header");
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("carry table: ") + e.what());
    }
}

std::string carry_table_filename(std::int64_t p, int N) {
    return "carry_p" + std::to_string(p) + "_N" + std::to_string(N) + ".json";
}

void write_carry_table(const CarryTable& t, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid()) + "." +
           std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << carry_table_to_json(t);
        if (!out) throw ConfigError("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

bool carry_table_plausible(const CarryTable& t) {
    const std::vector<CarryTerm> first{{Q(0), Q(1), 1}, {Q(1), Q(0), 1}};
    if (t.polys.empty() || t.polys[0] != first) return false;
    for (std::size_t n = 0; n < t.polys.size(); ++n) {
        const std::int64_t den = ipow(t.p, static_cast<int>(n));
        for (const auto& term : t.polys[n]) {
            if (term.ex + term.ey != 1 || term.c <= 0 || term.c >= t.p) return false;
            if (den % term.ex.denominator() != 0 || den % term.ey.denominator() != 0) return false;
        }
    }
    return true;
}

}  // namespace

std::shared_ptr<const CarryTable> carry_table(std::int64_t p, int N) {
    static std::mutex mu;
    static std::map<std::pair<std::int64_t, int>, std::shared_ptr<const CarryTable>> memo;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(p, N);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    std::shared_ptr<const CarryTable> table;
    const char* dir = std::getenv("PERFECTOID_CACHE_DIR");
    std::string path;
    if (dir && *dir) {
        path = (std::filesystem::path(dir) / carry_table_filename(p, N)).string();
        std::ifstream in(path, std::ios::binary);
        if (in) {
            std::stringstream ss;
            ss << in.rdbuf();
            try {
                auto t = carry_table_from_json(ss.str());
                if (t.p == p && t.N == N && carry_table_plausible(t)) table = std::make_shared<const CarryTable>(std::move(t));
            } catch (const SchemaError&) {
            }
        }
    }
    if (!table) {
        table = std::make_shared<const CarryTable>(build_carry_table(p, N));
        if (!path.empty()) {
            try {
                write_carry_table(*table, path);
            } catch (const std::exception&) {
            }
        }
    }
    memo[key] = table;
    return table;
}

}  // namespace perfectoid
