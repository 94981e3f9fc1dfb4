#pragma once

#include "perfectoid/witt.hpp"

#include <memory>
#include <string>
#include <vector>

namespace perfectoid {

enum class PrimitiveKind { Cyclotomic, Kummer, Custom };

std::string to_string(PrimitiveKind k);
PrimitiveKind primitive_kind_from_string(const std::string& s);

// Validated primitive element z = [z0] + p z1 with z1 a unit.
// Classes are computed in W(o_F) modulo I_N = {x : -log_p |x|_1 >= N}, an ideal
// contained in (p^N, z); cutoff(n) is the scaled exponent beyond which terms of
// coordinate n do not affect the class.
struct Primitive {
    WittVec z;
    WittVec z1;
    WittVec z1_inv;
    PrimitiveKind kind = PrimitiveKind::Custom;
    std::vector<std::int64_t> cutoffs;

    int N() const { return z.N(); }
    const FieldPtr& field_ptr() const { return z.field_ptr(); }
    const Field& field() const { return z.field(); }
    const PerfSeries& z0() const { return z.coord(0); }
};

using PrimitivePtr = std::shared_ptr<const Primitive>;

PrimitivePtr primitive_check(const WittVec& z, PrimitiveKind kind = PrimitiveKind::Custom);

// Field context large enough for stable reduction at length N.
FieldPtr tilting_field(PrimitiveKind kind, std::int64_t p, int N, int f = 1,
                       const std::vector<std::int64_t>& modulus = {});
// Cyclotomic: z = sum_{i<p} [1+t]^{i/p}. Kummer: z = p - [t].
PrimitivePtr preset_primitive(PrimitiveKind kind, std::int64_t p, int N, FieldPtr F = nullptr);

// Canonical truncation modulo I_N; coordinates known past their cutoff become exact.
WittVec tilt_truncate(const WittVec& x, const Primitive& z);

bool is_stable(const WittVec& x);

struct StableResult {
    WittVec rep;
    int passes = 0;
};

StableResult stable_reduce_traced(const WittVec& x, const Primitive& z);
WittVec stable_reduce(const WittVec& x, const Primitive& z);

// Element of o_K / p^N represented by a stable Witt vector.
class UntiltElt {
public:
    UntiltElt(PrimitivePtr mod, const WittVec& x);

    static UntiltElt zero(PrimitivePtr mod);
    static UntiltElt one(PrimitivePtr mod);
    static UntiltElt from_int(PrimitivePtr mod, std::int64_t k);
    static UntiltElt teichmuller(PrimitivePtr mod, const PerfSeries& a);

    const WittVec& rep() const { return rep_; }
    const PrimitivePtr& modulus() const { return mod_; }
    // True when the class lies in p^N o_K at the working precision.
    bool is_zero() const;

private:
    struct Raw {};
    UntiltElt(PrimitivePtr mod, WittVec rep, Raw);
    friend struct UntiltAccess;

    PrimitivePtr mod_;
    WittVec rep_;
};

UntiltElt untilt_add(const UntiltElt& a, const UntiltElt& b);
UntiltElt untilt_sub(const UntiltElt& a, const UntiltElt& b);
UntiltElt untilt_neg(const UntiltElt& a);
UntiltElt untilt_mul(const UntiltElt& a, const UntiltElt& b);
UntiltElt untilt_pow(const UntiltElt& a, std::int64_t n);
// Inverse of a unit class.
UntiltElt untilt_inv(const UntiltElt& a);
// a / b for |a| <= |b|, b nonzero.
UntiltElt untilt_div(const UntiltElt& a, const UntiltElt& b);
bool untilt_equal(const UntiltElt& a, const UntiltElt& b);

// -log_p |a|: c v(leading coordinate), or AtLeast(N) for the zero class.
NegLog untilt_norm(const UntiltElt& a);

// Image in o_K/(p) = o_F/(z0): leading coordinate truncated below c v = 1.
PerfSeries untilt_residue(const UntiltElt& a);

struct RootStep {
    NegLog residual;                 // -log_p |P(x_n)|
    std::optional<Q> step_neglog;    // -log_p |x_{n+1} - x_n|
    PsPoly residue_poly;             // reduction of Q_i u^i / Q_0
    bool certified = false;          // both contract inequalities hold
};

struct RootResult {
    UntiltElt root;
    std::vector<RootStep> steps;
    NegLog final_residual;
    bool exact = false;  // P(root) vanishes at the working precision
};

// Monic P, coefficients from degree 0 upward.
RootResult untilt_root(const std::vector<UntiltElt>& P, int steps);

UntiltElt untilt_poly_eval(const std::vector<UntiltElt>& P, const UntiltElt& x);

}  // namespace perfectoid
