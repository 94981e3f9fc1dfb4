#pragma once

#include "perfectoid/aring.hpp"
#include "perfectoid/witt.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace perfectoid {

// Square matrix over W_N(L), row-major.
struct WMat {
    int d = 0;
    std::vector<WittVec> e;

    const WittVec& at(int i, int j) const { return e.at(static_cast<std::size_t>(i * d + j)); }
    WittVec& at(int i, int j) { return e.at(static_cast<std::size_t>(i * d + j)); }
    const FieldPtr& field_ptr() const { return e.front().field_ptr(); }
    int N() const { return e.front().N(); }
};

// Square matrix over the imperfect period ring, row-major.
struct AMat {
    int d = 0;
    std::vector<ASeries> e;

    const ASeries& at(int i, int j) const { return e.at(static_cast<std::size_t>(i * d + j)); }
    ASeries& at(int i, int j) { return e.at(static_cast<std::size_t>(i * d + j)); }
};

WMat wm_identity(const FieldPtr& F, int N, int d);
WMat wm_zero(const FieldPtr& F, int N, int d);
WMat wm_add(const WMat& a, const WMat& b);
WMat wm_sub(const WMat& a, const WMat& b);
WMat wm_mul(const WMat& a, const WMat& b);
// Gauss-Jordan elimination with unit pivots.
WMat wm_inv(const WMat& a);
WMat wm_frobenius(const WMat& a, int k);
WMat wm_gamma(const WMat& a, const GammaElt& g);
bool wm_is_zero(const WMat& a);
bool wm_equal(const WMat& a, const WMat& b);
// True when every entry is 1 or 0 (on and off the diagonal) modulo p.
bool wm_is_one_mod_p(const WMat& a);
// Minimum of the entrywise Gauss norms.
NegLog wm_gauss_norm(const WMat& a, const Q& r);
NegLog wm_coeff_sup_norm(const WMat& a);

AMat am_identity(std::int64_t p, int N, int d);
AMat am_add(const AMat& a, const AMat& b);
AMat am_sub(const AMat& a, const AMat& b);
AMat am_mul(const AMat& a, const AMat& b);
AMat am_phi(const AMat& a);
AMat am_gamma(const AMat& a, const GammaElt& g, std::optional<std::int64_t> top = std::nullopt);
// Inverse of 1 + p X by the finite geometric series.
AMat am_inv_one_mod_p(const AMat& a);
WMat embed_amat(const AMat& a, const FieldPtr& F);
NegLog am_gauss_norm(const AMat& a, const Q& r, const Q& scale);

enum class Layer { W, A };

struct PhiGammaModule {
    Layer layer = Layer::W;
    GammaElt gamma;
    WMat A;  // phi(e_j) = sum_i A_ij e_i
    WMat G;  // gamma(e_j) = sum_i G_ij e_i
    std::optional<AMat> A_a;  // A-layer representatives of A and G
    std::optional<AMat> G_a;

    int d() const { return A.d; }
    int N() const { return A.N(); }
    const FieldPtr& field_ptr() const { return A.field_ptr(); }
};

struct ValidationReport {
    bool etale = false;
    bool commutes = false;
    bool layer_consistent = true;
    NegLog commutation_residual;  // Gauss norm at r = 1 of A phi(G) - G gamma(A)
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

ValidationReport pgm_check(const PhiGammaModule& M);
// Throws PreconditionError naming the failed invariants.
const PhiGammaModule& pgm_validate(const PhiGammaModule& M);

// A' = U^{-1} A phi(U), G' = U^{-1} G gamma(U). The result lives in the W-layer.
PhiGammaModule change_basis(const PhiGammaModule& M, const WMat& U);

struct GoodBasisStep {
    int n = 0;
    int m = 0;
    NegLog defect;  // -log_p |X_n|' before the step
};

struct GoodBasisResult {
    WMat U;
    WMat G_limit;  // U^{-1} F phi^k(U)
    std::vector<GoodBasisStep> steps;
    NegLog norm;  // -log_p |G_limit - 1|_1
    bool unit_mod_p = false;
    bool certified = false;
};

GoodBasisResult good_basis(const WMat& F, int frobenius_power = 1);

struct DescentStep {
    int l = 0;
    NegLog x_norm;  // -log_p |X_l|_r
    NegLog y_norm;  // -log_p |Y_l|_r
    bool x_ok = false;  // |X_l|_r <= eps^2
    bool y_ok = false;  // |Y_l|_r <= eps^{l+2}
};

struct DescentReport {
    Q r{0};
    Q eps_exponent{0};  // eps = p^{-eps_exponent}
    Q kappa{0};         // measured splitting loss at r
    int iterations = 0;
    std::vector<DescentStep> trace;
    WMat U;
    WMat H;
    WMat A_new;
    std::optional<AMat> H_a;
    std::optional<AMat> A_a;
    bool schedule_ok = false;
    bool h_in_a_layer = false;
    bool c_zero = false;
    bool commutation_zero = false;
    bool base_extension_ok = false;
    bool certified() const {
        return schedule_ok && h_in_a_layer && c_zero && commutation_zero && base_extension_ok;
    }
};

struct DescentOptions {
    int max_iterations = 0;  // 0 means 8N
    int max_grid_exponent = 16;
};

DescentReport cc_descent(const PhiGammaModule& M, const DescentOptions& opt = {});

// The A-layer element y with x = embed(y), if the T-part of x vanishes at precision.
std::optional<ASeries> to_a_layer(const WittVec& x, const GammaElt& g);

struct GaugeParams {
    std::int64_t p = 2;
    int N = 3;
    int d = 1;
    int M = 4;
    Q e_max{24};
    Q scale{2};
    std::string gamma = "1+p^2";
    int a_degree = 2;   // degree of the A-layer gauge polynomials
    int v_terms = 2;    // terms per entry of the secret W-layer gauge
    int v_denominator = 1;  // exponent denominators p^k of the secret gauge
    bool trivial_secret = false;
};

struct GaugedModule {
    PhiGammaModule hidden;
    PhiGammaModule base;  // A-layer module (A0, G0)
    WMat V;               // secret W-layer gauge
    AMat W;               // A-layer gauge from the constant module
    AMat C;               // constant phi-matrix
    AMat D;               // constant gamma-matrix
};

GaugedModule random_gauge_module(std::uint64_t seed, const GaugeParams& params);

}  // namespace perfectoid
