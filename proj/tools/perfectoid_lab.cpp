#include "perfectoid/aring.hpp"
#include "perfectoid/descent.hpp"
#include "perfectoid/errors.hpp"
#include "perfectoid/io.hpp"
#include "perfectoid/suites.hpp"
#include "perfectoid/symstrict.hpp"
#include "perfectoid/tilting.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace perfectoid;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

// Input errors map to the usage exit code.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::string read_text(const std::string& path) {
    if (path == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
}

Json read_json(const std::string& path) { return json_parse(read_text(path), path == "-" ? "stdin" : path); }

const Json& need(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("$: missing key \"") + key + "\"");
    return j.at(key);
}

// Series objects may omit their field keys; the ambient field fills them in.
Json with_field(Json series, const Field& F) {
    if (!series.is_object()) return series;
    const Json keys = field_to_json(F);
    for (const auto& [k, v] : keys.items())
        if (!series.contains(k)) series[k] = v;
    return series;
}

WittVec read_witt(const Json& j, const Field& F, const std::string& path) {
    Json x = j;
    if (x.is_object() && x.contains("coords") && x.at("coords").is_array())
        for (auto& c : x["coords"]) c = with_field(c, F);
    return wittvec_from_json(x, path);
}

ASeries read_a(const Json& j, const Config& c, const std::string& path) {
    Json x = j;
    if (x.is_object() && !x.contains("N")) x["N"] = c.N;
    return aseries_from_json(x, c.p, path);
}

GammaElt read_gamma(const Json& in, const Config& c) {
    return in.contains("gamma") ? gamma_from_json(in.at("gamma"), c.p, "$.gamma") : GammaElt::parse(c.p, c.gamma);
}

struct Common {
    std::string config_path;
    std::int64_t p = 0;
    int N = 0;
    std::int64_t seed = -1;
    std::string preset;
    std::string in = "-";
    std::string out = "-";
};

Config load_config(const Common& o) {
    Config c;
    if (!o.config_path.empty()) c = config_from_json(json_parse(read_text(o.config_path), o.config_path));
    if (o.p) c.p = o.p;
    if (o.N) c.N = o.N;
    if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
    if (!o.preset.empty()) {
        if (o.preset == "cyclotomic") c.preset = PrimitiveKind::Cyclotomic;
        else if (o.preset == "kummer") c.preset = PrimitiveKind::Kummer;
        else throw ConfigError("config: preset must be cyclotomic or kummer");
    }
    if (c.p == 3 && o.p && o.config_path.empty()) {
        // the defaults are sized for p = 2
        c.M = 3;
        c.e_max = Q(12);
    }
    validate_config(c);
    if (!c.cache_dir.empty()) ::setenv("PERFECTOID_CACHE_DIR", c.cache_dir.c_str(), 1);
    return c;
}

int emit(const Common& o, const Json& j, bool ok = true) {
    write_text(o.out, json_dump(j));
    return ok ? kExitPass : kExitCheckFailure;
}

// ---------------------------------------------------------------- witt

int witt_op(const Common& o, const std::string& op, int k, const std::string& radius) {
    const Config c = load_config(o);
    const FieldPtr F = config_field(c);
    const Json in = read_json(o.in);
    const WittVec x = read_witt(need(in, "x"), *F, "$.x");
    Json out{{"op", op}};
    if (op == "add" || op == "sub" || op == "mul") {
        const WittVec y = read_witt(need(in, "y"), *F, "$.y");
        const WittVec r = op == "add" ? w_add(x, y) : op == "sub" ? w_sub(x, y) : w_mul(x, y);
        out["result"] = wittvec_to_json(r);
    } else if (op == "neg") {
        out["result"] = wittvec_to_json(w_neg(x));
    } else if (op == "inv") {
        out["result"] = wittvec_to_json(w_inv(x));
    } else if (op == "frob") {
        if (in.contains("k")) k = in.at("k").get<int>();
        out["k"] = k;
        out["result"] = wittvec_to_json(w_frobenius(x, k));
    } else if (op == "norm") {
        const Q r = in.contains("r") ? q_parse(in.at("r").get<std::string>()) : q_parse(radius);
        if (r <= Q(0)) throw UsageError("radius must be positive");
        out["r"] = q_to_string(r);
        out["gauss_norm"] = neglog_to_json(gauss_norm(x, r));
        out["coeff_sup_norm"] = neglog_to_json(coeff_sup_norm(x));
    }
    return emit(o, out);
}

int witt_table(const Common& o, std::int64_t p, int prec) {
    if (p < 2 || !is_prime(p)) throw UsageError("--p must be prime");
    if (prec < 1) throw UsageError("--prec must be positive");
    if (prec > kCarryTableMaxN)
        throw UsageError("--prec " + std::to_string(prec) + " exceeds the supported length " + std::to_string(kCarryTableMaxN));
    const CarryTable t = build_carry_table(p, prec);
    std::string path = o.out;
    if (path == "-") {
        if (const char* dir = std::getenv("PERFECTOID_CACHE_DIR"); dir && *dir) {
            std::filesystem::create_directories(dir);
            path = (std::filesystem::path(dir) / carry_table_filename(p, prec)).string();
        }
    }
    if (path == "-") {
        std::cout << carry_table_to_json(t);
    } else {
        write_carry_table(t, path);
        std::cerr << "wrote " << path << "\n";
    }
    return kExitPass;
}

// ---------------------------------------------------------------- tilt

PrimitivePtr config_primitive(const Config& c) {
    const FieldPtr F = tilting_field(c.preset, c.p, c.N, c.f, c.modulus);
    return preset_primitive(c.preset, c.p, c.N, F);
}

Json untilt_json(const UntiltElt& a) {
    return Json{{"rep", wittvec_to_json(a.rep())}, {"norm", neglog_to_json(untilt_norm(a))}};
}

int tilt_primitive(const Common& o, bool check_input) {
    const Config c = load_config(o);
    const PrimitivePtr z = config_primitive(c);
    if (!check_input) {
        return emit(o, Json{{"kind", to_string(z->kind)},
                            {"z", wittvec_to_json(z->z)},
                            {"z0_norm", neglog_to_json(coeff_sup_norm(WittVec::teichmuller(z->z0(), 1)))},
                            {"cutoffs", z->cutoffs}});
    }
    const Json in = read_json(o.in);
    const WittVec x = read_witt(need(in, "z"), z->field(), "$.z");
    try {
        const PrimitivePtr q = primitive_check(x);
        return emit(o, Json{{"primitive", true}, {"cutoffs", q->cutoffs}});
    } catch (const NotPrimitiveError& e) {
        return emit(o, Json{{"primitive", false}, {"reason", e.what()}}, false);
    }
}

int tilt_reduce(const Common& o) {
    const Config c = load_config(o);
    const PrimitivePtr z = config_primitive(c);
    const Json in = read_json(o.in);
    const WittVec x = read_witt(need(in, "x"), z->field(), "$.x");
    const StableResult r = stable_reduce_traced(x, *z);
    return emit(o, Json{{"kind", to_string(z->kind)},
                        {"rep", wittvec_to_json(r.rep)},
                        {"passes", r.passes},
                        {"stable", is_stable(r.rep)},
                        {"norm", neglog_to_json(untilt_norm(UntiltElt(z, r.rep)))}});
}

int tilt_arith(const Common& o) {
    const Config c = load_config(o);
    const PrimitivePtr z = config_primitive(c);
    const Json in = read_json(o.in);
    const std::string op = need(in, "op").get<std::string>();
    const UntiltElt x(z, read_witt(need(in, "x"), z->field(), "$.x"));
    auto y = [&] { return UntiltElt(z, read_witt(need(in, "y"), z->field(), "$.y")); };
    UntiltElt r = UntiltElt::zero(z);
    if (op == "add") r = untilt_add(x, y());
    else if (op == "sub") r = untilt_sub(x, y());
    else if (op == "mul") r = untilt_mul(x, y());
    else if (op == "div") r = untilt_div(x, y());
    else if (op == "neg") r = untilt_neg(x);
    else if (op == "inv") r = untilt_inv(x);
    else if (op == "pow") r = untilt_pow(x, need(in, "n").get<std::int64_t>());
    else throw SchemaError("$.op: expected add, sub, mul, div, neg, inv or pow");
    Json out = untilt_json(r);
    out["op"] = op;
    return emit(o, out);
}

int tilt_root(const Common& o, int steps) {
    const Config c = load_config(o);
    const PrimitivePtr z = config_primitive(c);
    const Json in = read_json(o.in);
    const Json& poly = need(in, "poly");
    if (!poly.is_array()) throw SchemaError("$.poly: expected an array of coefficients, constant first");
    std::vector<UntiltElt> P;
    for (std::size_t i = 0; i < poly.size(); ++i)
        P.emplace_back(z, read_witt(poly[i], z->field(), "$.poly[" + std::to_string(i) + "]"));
    if (in.contains("steps")) steps = in.at("steps").get<int>();
    if (steps > c.N - 1)
        throw UsageError("root iteration with " + std::to_string(steps) + " steps needs N >= " + std::to_string(steps + 1));
    const RootResult r = untilt_root(P, steps);
    Json trace = Json::array();
    bool ok = true;
    for (std::size_t n = 0; n < r.steps.size(); ++n) {
        const RootStep& s = r.steps[n];
        ok = ok && s.certified;
        trace.push_back(Json{{"n", n},
                             {"residual", neglog_to_json(s.residual)},
                             {"step", s.step_neglog ? Json(q_to_string(*s.step_neglog)) : Json(nullptr)},
                             {"certified", s.certified}});
    }
    return emit(o,
                Json{{"root", untilt_json(r.root)},
                     {"steps", std::move(trace)},
                     {"final_residual", neglog_to_json(r.final_residual)},
                     {"exact", r.exact},
                     {"certified", ok}},
                ok);
}

// ---------------------------------------------------------------- aring

int aring_op(const Common& o, const std::string& op) {
    const Config c = load_config(o);
    const Json in = read_json(o.in);
    if (op == "split") {
        const FieldPtr F = config_field(c);
        const SplitResult s = split_lift(read_witt(need(in, "x"), *F, "$.x"), read_gamma(in, c));
        return emit(o, split_to_json(s), s.certified);
    }
    const ASeries x = read_a(need(in, "x"), c, "$.x");
    if (op == "phi") return emit(o, Json{{"op", op}, {"result", aseries_to_json(a_phi(x))}});
    const GammaElt g = read_gamma(in, c);
    std::optional<std::int64_t> top;
    if (in.contains("top")) top = in.at("top").get<std::int64_t>();
    return emit(o, Json{{"op", op}, {"gamma", gamma_to_json(g)}, {"result", aseries_to_json(a_gamma(x, g, top))}});
}

// ---------------------------------------------------------------- descend

// Witt arithmetic on inputs with denominators p^k needs a denominator bound p^M with M >= k + N - 1.
void check_budget(const PhiGammaModule& M) {
    const FieldPtr& F = M.field_ptr();
    const int N = M.A.e.front().N();
    int den = 0;
    for (const WMat* m : {&M.A, &M.G})
        for (const auto& x : m->e)
            for (int n = 0; n < x.N(); ++n)
                for (const auto& t : x.coord(n).terms()) {
                    // coordinate n of a sum carries p^n-th roots of the inputs
                    const Q e = x.coord(n).from_scaled(t.first);
                    const int k = e.denominator() == 1 ? 0 : static_cast<int>(p_valuation(e.denominator(), F->p()));
                    den = std::max(den, k - n);
                }
    const std::int64_t S = F->S;
    int M_have = 0;
    for (std::int64_t s = S; s > 1; s /= F->p()) ++M_have;
    if (M_have < den + N - 1)
        throw UsageError("precision budget: entries with denominators p^" + std::to_string(den) + " at N = " +
                         std::to_string(N) + " need a denominator bound p^" + std::to_string(den + N - 1) +
                         ", the module field has p^" + std::to_string(M_have));
}

int descend_run(const Common& o, int N, const std::string& report) {
    const Json in = read_json(o.in);
    const PhiGammaModule M = module_from_json(in);
    if (M.A.e.empty()) throw SchemaError("$.A: empty matrix");
    const int have = M.A.e.front().N();
    if (N && N != have)
        throw UsageError("module has N = " + std::to_string(have) + " but --N " + std::to_string(N) + " was requested");
    check_budget(M);
    const DescentReport r = cc_descent(M);
    const Json j = descent_report_to_json(r);
    write_text(report.empty() ? o.out : report, json_dump(j));
    return r.certified() ? kExitPass : kExitCheckFailure;
}

int descend_gen(const Common& o, std::int64_t seed, int d, int v_den, const std::string& secret) {
    const Config c = load_config(o);
    GaugeParams P;
    P.p = c.p;
    P.N = c.N;
    P.d = d;
    P.M = c.M;
    P.e_max = c.e_max;
    P.scale = cyclotomic_scale(c.p);
    P.gamma = c.gamma;
    P.v_denominator = v_den;
    const GaugedModule gm = random_gauge_module(static_cast<std::uint64_t>(seed), P);
    if (!secret.empty())
        write_text(secret, json_dump(Json{{"seed", seed}, {"base", module_to_json(gm.base)}, {"V", wmat_to_json(gm.V)}}));
    return emit(o, module_to_json(gm.hidden));
}

// ---------------------------------------------------------------- verify

int verify(const Common& o, const std::string& suite, const std::string& json_out, bool as_json) {
    const Config c = load_config(o);
    const SuiteReport r = run_suite(suite, c);
    const Json j = suite_report_to_json(r);
    if (!json_out.empty()) write_text(json_out, json_dump(j));
    if (as_json) write_text(o.out, json_dump(j));
    else write_text(o.out, suite_report_to_text(r));
    return r.passed() ? kExitPass : kExitCheckFailure;
}

void add_common(CLI::App* cmd, Common& o, bool io = true) {
    cmd->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--p", o.p, "prime (overrides the configuration)");
    cmd->add_option("--N", o.N, "p-adic length (overrides the configuration)");
    cmd->add_option("--seed", o.seed, "seed (overrides the configuration)");
    cmd->add_option("--preset", o.preset, "primitive element: cyclotomic or kummer");
    if (io) {
        cmd->add_option("--in", o.in, "input JSON file, - for stdin");
        cmd->add_option("--out", o.out, "output file, - for stdout");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact Witt vector, tilting and (phi, Gamma)-module computations"};
    app.require_subcommand(1);
    Common o;
    std::function<int()> action;

    auto* witt = app.add_subcommand("witt", "Witt vector arithmetic over perfect Laurent series fields");
    witt->require_subcommand(1);
    int frob_k = 1;
    std::string radius = "1";
    for (const char* op : {"add", "sub", "mul", "neg", "inv", "frob", "norm"}) {
        auto* cmd = witt->add_subcommand(op, std::string("read {\"x\"[, \"y\"]} and print the ") + op);
        add_common(cmd, o);
        if (std::string(op) == "frob") cmd->add_option("--k", frob_k, "Frobenius power");
        if (std::string(op) == "norm") cmd->add_option("--r", radius, "Gauss norm radius as a rational string");
        cmd->callback([&, name = std::string(op)] { action = [&, name] { return witt_op(o, name, frob_k, radius); }; });
    }
    std::int64_t table_p = 2;
    int table_prec = 3;
    auto* table = witt->add_subcommand("table", "build the carry polynomial table");
    table->add_option("--p", table_p, "prime")->required();
    table->add_option("--prec", table_prec, "number of levels")->required();
    table->add_option("--out", o.out, "output path; defaults to the cache directory, else stdout");
    table->callback([&] { action = [&] { return witt_table(o, table_p, table_prec); }; });

    auto* tilt = app.add_subcommand("tilt", "untilting: primitive elements, stable reduction, arithmetic, roots");
    tilt->require_subcommand(1);
    bool check_input = false;
    auto* prim = tilt->add_subcommand("primitive", "print the preset primitive element, or check {\"z\"} with --check");
    add_common(prim, o);
    prim->add_flag("--check", check_input, "check the input element instead");
    prim->callback([&] { action = [&] { return tilt_primitive(o, check_input); }; });
    auto* reduce = tilt->add_subcommand("reduce", "stable representative of {\"x\"}");
    add_common(reduce, o);
    reduce->callback([&] { action = [&] { return tilt_reduce(o); }; });
    auto* arith = tilt->add_subcommand("arith", "class arithmetic on {\"op\",\"x\"[,\"y\"|\"n\"]}");
    add_common(arith, o);
    arith->callback([&] { action = [&] { return tilt_arith(o); }; });
    int root_steps = 2;
    auto* root = tilt->add_subcommand("root", "root iteration on {\"poly\":[...]} (monic, constant first)");
    add_common(root, o);
    root->add_option("--steps", root_steps, "iteration steps");
    root->callback([&] { action = [&] { return tilt_root(o, root_steps); }; });

    auto* aring = app.add_subcommand("aring", "the imperfect ring: phi, gamma, splitting");
    aring->require_subcommand(1);
    for (const char* op : {"phi", "gamma", "split"}) {
        auto* cmd = aring->add_subcommand(op, std::string("apply ") + op + " to {\"x\"}");
        add_common(cmd, o);
        cmd->callback([&, name = std::string(op)] { action = [&, name] { return aring_op(o, name); }; });
    }

    auto* descend = app.add_subcommand("descend", "overconvergent descent of an etale (phi, Gamma)-module");
    add_common(descend, o);
    std::string report;
    descend->add_option("--report", report, "report path (defaults to --out)");
    std::int64_t gen_seed = 1;
    int gen_d = 1, gen_vden = 1;
    std::string secret;
    auto* gen = descend->add_subcommand("gen", "generate a gauged module with a hidden W-layer gauge");
    add_common(gen, o);
    gen->add_option("--d", gen_d, "rank (1 or 2)");
    gen->add_option("--v-denominator", gen_vden, "denominator exponent of the hidden gauge");
    gen->add_option("--secret", secret, "also write the base module and the hidden gauge here");
    gen->callback([&] { action = [&] { return descend_gen(o, o.seed >= 0 ? o.seed : gen_seed, gen_d, gen_vden, secret); }; });
    descend->callback([&] {
        if (!action) action = [&] { return descend_run(o, o.N, report); };
    });

    auto* ver = app.add_subcommand("verify", "run a verification suite");
    add_common(ver, o);
    std::string suite, json_out;
    bool as_json = false;
    ver->add_option("suite", suite, "witt, norms, tilt, gamma, descent or all")->required()->check(CLI::IsMember(suite_names()));
    ver->add_option("--json", json_out, "also write the JSON report here");
    ver->add_flag("--format-json", as_json, "print the JSON report instead of text");
    ver->callback([&] { action = [&] { return verify(o, suite, json_out, as_json); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }
    try {
        return action();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const Json::exception& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return kExitCheckFailure;
    }
}
