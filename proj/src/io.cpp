#include "perfectoid/io.hpp"

#include "perfectoid/errors.hpp"

#include <set>

namespace perfectoid {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw SchemaError(path + ": " + msg); }

const Json& member(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path, std::string("missing key \"") + key + "\"");
    return *it;
}

void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) fail(path, "unexpected key \"" + k + "\"");
}

std::int64_t get_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<std::int64_t>();
}

Q get_q(const Json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a rational string \"num/den\"");
    try {
        return q_parse(j.get<std::string>());
    } catch (const SchemaError& e) {
        fail(path, e.what());
    }
}

std::string sub(const std::string& path, const std::string& key) { return path + "." + key; }
std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

template <class F>
auto rethrow_as_schema(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SchemaError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    } catch (const PrecisionError& e) {
        fail(path, e.what());
    }
}

}  // namespace

// ---------------------------------------------------------------- fields and series

Json field_to_json(const Field& F) {
    return Json{{"p", F.p()},
                {"f", F.fq.f()},
                {"modulus", F.fq.modulus()},
                {"scale", q_to_string(F.scale)},
                {"denom_bound", F.S},
                {"e_max", q_to_string(F.e_max)}};
}

FieldPtr field_from_json(const Json& j, const std::string& path) {
    const std::int64_t p = get_int(member(j, "p", path), sub(path, "p"));
    if (p < 2 || !is_prime(p)) fail(sub(path, "p"), "p must be prime");
    const std::int64_t f = j.contains("f") ? get_int(j.at("f"), sub(path, "f")) : 1;
    std::vector<std::int64_t> modulus{0, 1};
    if (j.contains("modulus")) {
        const Json& m = j.at("modulus");
        if (!m.is_array()) fail(sub(path, "modulus"), "expected an array");
        modulus.clear();
        for (std::size_t i = 0; i < m.size(); ++i) modulus.push_back(get_int(m[i], idx(sub(path, "modulus"), i)));
    }
    const Q scale = j.contains("scale") ? get_q(j.at("scale"), sub(path, "scale")) : Q(1);
    const std::int64_t S = get_int(member(j, "denom_bound", path), sub(path, "denom_bound"));
    if (S < 1 || !is_p_power(S, p)) fail(sub(path, "denom_bound"), "denominator bound must be a power of p");
    const int M = S == 1 ? 0 : p_valuation(S, p);
    const Q e_max = j.contains("e_max") ? get_q(j.at("e_max"), sub(path, "e_max")) : Q(24);
    return rethrow_as_schema(path, [&] {
        return make_field(Fq(p, static_cast<int>(f), modulus), scale, M, e_max);
    });
}

Json perfseries_to_json(const PerfSeries& a) {
    Json j = field_to_json(a.field());
    const Fq& fq = a.field().fq;
    Json terms = Json::array();
    for (const auto& [e, c] : a.terms()) terms.push_back(Json{{"e", q_to_string(a.from_scaled(e))}, {"c", fq.to_vector(c)}});
    j["terms"] = std::move(terms);
    j["prec"] = a.is_exact() ? Json(nullptr) : Json(q_to_string(*a.prec()));
    return j;
}

namespace {

PerfSeries series_in_field(const Json& j, const FieldPtr& F, const std::string& path) {
    const Json& terms = member(j, "terms", path);
    if (!terms.is_array()) fail(sub(path, "terms"), "expected an array");
    std::int64_t prec = kExact;
    if (j.contains("prec") && !j.at("prec").is_null()) {
        const Q pr = get_q(j.at("prec"), sub(path, "prec"));
        rethrow_as_schema(sub(path, "prec"), [&] { return p_denominator_exponent(pr, F->p()); });
        if (pr.denominator() > F->S) fail(sub(path, "prec"), "denominator exceeds the bound " + std::to_string(F->S));
        prec = q_floor(pr * F->S);
    }
    std::vector<PerfSeries::Term> t;
    std::set<std::int64_t> seen;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string tp = idx(sub(path, "terms"), i);
        only_keys(terms[i], {"e", "c"}, tp);
        const Q e = get_q(member(terms[i], "e", tp), sub(tp, "e"));
        if (!is_p_power(e.denominator(), F->p()))
            fail(sub(tp, "e"), "denominator of " + q_to_string(e) + " is not a power of " + std::to_string(F->p()));
        if (e.denominator() > F->S) fail(sub(tp, "e"), "denominator exceeds the bound " + std::to_string(F->S));
        const std::int64_t es = q_floor(e * F->S);
        if (!seen.insert(es).second) fail(sub(tp, "e"), "repeated exponent");
        if (es >= prec) fail(sub(tp, "e"), "exponent at or beyond the precision");
        const Json& c = member(terms[i], "c", tp);
        std::vector<std::int64_t> cv;
        if (c.is_array()) {
            for (std::size_t k = 0; k < c.size(); ++k) cv.push_back(get_int(c[k], idx(sub(tp, "c"), k)));
        } else {
            cv.push_back(get_int(c, sub(tp, "c")));
        }
        const FqElem ce = rethrow_as_schema(sub(tp, "c"), [&] { return F->fq.from_vector(cv); });
        if (Fq::is_zero(ce)) fail(sub(tp, "c"), "zero coefficient");
        t.emplace_back(es, ce);
    }
    return PerfSeries(F, std::move(t), prec);
}

}  // namespace

PerfSeries perfseries_from_json(const Json& j, const std::string& path) {
    only_keys(j, {"p", "f", "modulus", "scale", "denom_bound", "e_max", "terms", "prec"}, path);
    return series_in_field(j, field_from_json(j, path), path);
}

Json wittvec_to_json(const WittVec& x) {
    Json coords = Json::array();
    for (const auto& c : x.coords()) coords.push_back(perfseries_to_json(c));
    return Json{{"N", x.N()}, {"coords", std::move(coords)}};
}

WittVec wittvec_from_json(const Json& j, const std::string& path) {
    only_keys(j, {"N", "coords"}, path);
    const std::int64_t N = get_int(member(j, "N", path), sub(path, "N"));
    const Json& c = member(j, "coords", path);
    if (!c.is_array()) fail(sub(path, "coords"), "expected an array");
    if (N < 1 || static_cast<std::int64_t>(c.size()) != N) fail(sub(path, "coords"), "expected N coordinates");
    std::vector<PerfSeries> coords;
    FieldPtr F;
    for (std::size_t i = 0; i < c.size(); ++i) {
        PerfSeries s = perfseries_from_json(c[i], idx(sub(path, "coords"), i));
        if (!F) {
            F = s.field_ptr();
        } else if (!same_field(F, s.field_ptr())) {
            fail(idx(sub(path, "coords"), i), "coordinate field differs from coordinate 0");
        } else {
            s = PerfSeries(F, s.terms(), s.prec_scaled());
        }
        coords.push_back(std::move(s));
    }
    return WittVec(F, std::move(coords));
}

// ---------------------------------------------------------------- imperfect ring

Json aseries_to_json(const ASeries& a) {
    Json coeffs = Json::object();
    for (const auto& [n, c] : a.coeffs()) coeffs[std::to_string(n)] = c;
    return Json{{"p", a.p()},
                {"N", a.N()},
                {"window", Json::array({a.n_min(), a.is_exact() ? Json(nullptr) : Json(a.n_max())})},
                {"coeffs", std::move(coeffs)}};
}

ASeries aseries_from_json(const Json& j, std::optional<std::int64_t> p, const std::string& path) {
    only_keys(j, {"p", "N", "window", "coeffs"}, path);
    if (j.contains("p")) {
        const std::int64_t jp = get_int(j.at("p"), sub(path, "p"));
        if (p && *p != jp) fail(sub(path, "p"), "prime differs from the context");
        p = jp;
    }
    if (!p) fail(path, "missing key \"p\"");
    if (*p < 2 || !is_prime(*p)) fail(sub(path, "p"), "p must be prime");
    const std::int64_t N = get_int(member(j, "N", path), sub(path, "N"));
    if (N < 1 || N >= max_level(*p)) fail(sub(path, "N"), "p-adic level out of range");
    std::optional<std::int64_t> n_min;
    std::int64_t n_max = kExact;
    if (j.contains("window")) {
        const Json& w = j.at("window");
        if (!w.is_array() || w.size() != 2) fail(sub(path, "window"), "expected [lo, hi]");
        n_min = get_int(w[0], idx(sub(path, "window"), 0));
        if (!w[1].is_null()) n_max = get_int(w[1], idx(sub(path, "window"), 1));
    }
    const Json& c = member(j, "coeffs", path);
    if (!c.is_object()) fail(sub(path, "coeffs"), "expected an object");
    const std::int64_t mod = ipow(*p, static_cast<int>(N));
    std::map<std::int64_t, std::int64_t> coeffs;
    for (const auto& [k, v] : c.items()) {
        const std::string cp = sub(sub(path, "coeffs"), k);
        std::int64_t n = 0;
        try {
            std::size_t used = 0;
            n = std::stoll(k, &used);
            if (used != k.size()) fail(cp, "key is not an integer");
        } catch (const std::logic_error&) {
            fail(cp, "key is not an integer");
        }
        const std::int64_t cv = get_int(v, cp);
        if (cv <= 0 || cv >= mod) fail(cp, "coefficient must lie in [1, p^N)");
        if (n > n_max) fail(cp, "index beyond the window");
        if (n_min && n < *n_min) fail(cp, "index below the window");
        coeffs.emplace(n, cv);
    }
    return rethrow_as_schema(path, [&] { return ASeries(*p, static_cast<int>(N), std::move(coeffs), n_max, n_min); });
}

Json gamma_to_json(const GammaElt& g) {
    try {
        if (GammaElt::parse(g.p(), g.description()) == g) return Json(g.description());
    } catch (const std::exception&) {
    }
    return Json{{"value", g.value()}, {"exact", g.exact()}};
}

GammaElt gamma_from_json(const Json& j, std::int64_t p, const std::string& path) {
    if (j.is_string()) return rethrow_as_schema(path, [&] { return GammaElt::parse(p, j.get<std::string>()); });
    if (j.is_number_integer()) return rethrow_as_schema(path, [&] { return GammaElt::from_int(p, j.get<std::int64_t>()); });
    only_keys(j, {"value", "exact"}, path);
    const std::int64_t v = get_int(member(j, "value", path), sub(path, "value"));
    const Json& ex = member(j, "exact", path);
    if (!ex.is_boolean()) fail(sub(path, "exact"), "expected a boolean");
    return rethrow_as_schema(path, [&] { return GammaElt(p, v, ex.get<bool>(), std::to_string(v)); });
}

Json telt_to_json(const TElt& z) {
    Json j = Json::object();
    for (const auto& [e, a] : z) j[q_to_string(e)] = aseries_to_json(a);
    return j;
}

TElt telt_from_json(const Json& j, std::optional<std::int64_t> p, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    TElt out;
    for (const auto& [k, v] : j.items()) {
        const std::string kp = sub(path, k);
        const Q e = get_q(Json(k), kp);
        if (e <= Q(0) || e >= Q(1)) fail(kp, "component must lie in (0, 1)");
        ASeries a = aseries_from_json(v, p, kp);
        if (!is_p_power(e.denominator(), a.p())) fail(kp, "denominator of " + k + " is not a power of p");
        p = a.p();
        out.emplace(e, std::move(a));
    }
    return out;
}

// ---------------------------------------------------------------- modules

Json wmat_to_json(const WMat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.d; ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.d; ++j) row.push_back(wittvec_to_json(m.at(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json amat_to_json(const AMat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.d; ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.d; ++j) row.push_back(aseries_to_json(m.at(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json module_to_json(const PhiGammaModule& M) {
    Json j{{"d", M.d()}, {"gamma", gamma_to_json(M.gamma)}};
    if (M.layer == Layer::A && M.A_a && M.G_a) {
        j["layer"] = "A";
        j["field"] = field_to_json(*M.field_ptr());
        j["N"] = M.N();
        j["A"] = amat_to_json(*M.A_a);
        j["G"] = amat_to_json(*M.G_a);
    } else {
        j["layer"] = "W";
        j["A"] = wmat_to_json(M.A);
        j["G"] = wmat_to_json(M.G);
    }
    return j;
}

namespace {

template <class T, class Parse>
std::vector<T> parse_matrix(const Json& j, std::int64_t d, const std::string& path, Parse parse) {
    if (!j.is_array() || static_cast<std::int64_t>(j.size()) != d) fail(path, "expected d rows");
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Json& row = j[i];
        if (!row.is_array() || static_cast<std::int64_t>(row.size()) != d) fail(idx(path, i), "expected d entries");
        for (std::size_t k = 0; k < row.size(); ++k) out.push_back(parse(row[k], idx(idx(path, i), k)));
    }
    return out;
}

}  // namespace

PhiGammaModule module_from_json(const Json& j, const std::string& path) {
    only_keys(j, {"d", "layer", "gamma", "A", "G", "field", "N"}, path);
    const std::int64_t d = get_int(member(j, "d", path), sub(path, "d"));
    if (d < 1 || d > 8) fail(sub(path, "d"), "rank must lie in [1, 8]");
    const Json& layer = member(j, "layer", path);
    if (!layer.is_string() || (layer != "W" && layer != "A")) fail(sub(path, "layer"), "expected \"W\" or \"A\"");
    const Json& gj = member(j, "gamma", path);
    if (layer == "W") {
        if (j.contains("field") || j.contains("N")) fail(path, "\"field\" and \"N\" belong to A-layer modules");
        const auto parse = [](const Json& e, const std::string& p) { return wittvec_from_json(e, p); };
        WMat A{static_cast<int>(d), parse_matrix<WittVec>(member(j, "A", path), d, sub(path, "A"), parse)};
        WMat G{static_cast<int>(d), parse_matrix<WittVec>(member(j, "G", path), d, sub(path, "G"), parse)};
        const FieldPtr& F = A.e.front().field_ptr();
        const int N = A.e.front().N();
        for (std::size_t k = 0; k < A.e.size(); ++k) {
            for (const WittVec* x : {&A.e[k], &G.e[k]}) {
                if (!same_field(F, x->field_ptr())) fail(path, "matrix entries over different fields");
                if (x->N() != N) fail(path, "matrix entries of different length");
            }
        }
        const auto rebase = [&](WittVec& x) {
            std::vector<PerfSeries> c;
            for (const auto& s : x.coords()) c.emplace_back(F, s.terms(), s.prec_scaled());
            x = WittVec(F, std::move(c));
        };
        for (auto& x : A.e) rebase(x);
        for (auto& x : G.e) rebase(x);
        GammaElt g = gamma_from_json(gj, F->p(), sub(path, "gamma"));
        return PhiGammaModule{Layer::W, std::move(g), std::move(A), std::move(G), std::nullopt, std::nullopt};
    }
    const FieldPtr F = field_from_json(member(j, "field", path), sub(path, "field"));
    const std::int64_t N = get_int(member(j, "N", path), sub(path, "N"));
    const std::int64_t p = F->p();
    const auto parse = [&](const Json& e, const std::string& pp) {
        ASeries a = aseries_from_json(e, p, pp);
        if (a.N() != N) fail(pp, "entry level differs from N");
        return a;
    };
    AMat A{static_cast<int>(d), parse_matrix<ASeries>(member(j, "A", path), d, sub(path, "A"), parse)};
    AMat G{static_cast<int>(d), parse_matrix<ASeries>(member(j, "G", path), d, sub(path, "G"), parse)};
    GammaElt g = gamma_from_json(gj, p, sub(path, "gamma"));
    WMat Aw = rethrow_as_schema(path, [&] { return embed_amat(A, F); });
    WMat Gw = rethrow_as_schema(path, [&] { return embed_amat(G, F); });
    return PhiGammaModule{Layer::A, std::move(g), std::move(Aw), std::move(Gw), std::move(A), std::move(G)};
}

// ---------------------------------------------------------------- reports

Json neglog_to_json(const NegLog& v) { return Json(v.to_string()); }

Json split_to_json(const SplitResult& s) {
    return Json{{"y", aseries_to_json(s.y)},
                {"z", telt_to_json(s.z)},
                {"residual", neglog_to_json(s.residual)},
                {"certified", s.certified}};
}

Json good_basis_to_json(const GoodBasisResult& g) {
    Json steps = Json::array();
    for (const auto& s : g.steps) steps.push_back(Json{{"n", s.n}, {"m", s.m}, {"defect", neglog_to_json(s.defect)}});
    return Json{{"U", wmat_to_json(g.U)},
                {"G_limit", wmat_to_json(g.G_limit)},
                {"steps", std::move(steps)},
                {"norm", neglog_to_json(g.norm)},
                {"unit_mod_p", g.unit_mod_p},
                {"certified", g.certified}};
}

Json descent_report_to_json(const DescentReport& r) {
    Json trace = Json::array();
    for (const auto& s : r.trace)
        trace.push_back(Json{{"l", s.l},
                             {"x_norm", neglog_to_json(s.x_norm)},
                             {"y_norm", neglog_to_json(s.y_norm)},
                             {"x_ok", s.x_ok},
                             {"y_ok", s.y_ok}});
    Json j{{"r", q_to_string(r.r)},
           {"eps_exponent", q_to_string(r.eps_exponent)},
           {"kappa", q_to_string(r.kappa)},
           {"iterations", r.iterations},
           {"trace", std::move(trace)},
           {"U", wmat_to_json(r.U)},
           {"H", wmat_to_json(r.H)},
           {"A", wmat_to_json(r.A_new)},
           {"flags",
            Json{{"schedule", r.schedule_ok},
                 {"h_in_a_layer", r.h_in_a_layer},
                 {"c_zero", r.c_zero},
                 {"commutation_zero", r.commutation_zero},
                 {"base_extension", r.base_extension_ok}}},
           {"certified", r.certified()}};
    if (r.H_a) j["H_a"] = amat_to_json(*r.H_a);
    if (r.A_a) j["A_a"] = amat_to_json(*r.A_a);
    return j;
}

std::string json_dump(const Json& j) { return j.dump(2) + "\n"; }

Json json_parse(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw SchemaError(what + ": " + e.what());
    }
}

}  // namespace perfectoid
