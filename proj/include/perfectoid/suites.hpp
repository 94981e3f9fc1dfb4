#pragma once

#include "perfectoid/io.hpp"
#include "perfectoid/tilting.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace perfectoid {

struct Config {
    std::int64_t p = 2;
    int f = 1;
    std::vector<std::int64_t> modulus;  // empty: the prime field
    int N = 3;
    Q e_max{24};
    int M = 4;
    PrimitiveKind preset = PrimitiveKind::Cyclotomic;
    std::int64_t window_lo = -8;
    std::int64_t window_hi = 32;
    std::string cache_dir;
    std::uint64_t seed = 1;
    std::string gamma = "1+p^2";
    int workers = 0;  // 0: hardware concurrency
};

// Unknown keys and out-of-range values raise ConfigError.
Config config_from_json(const Json& j);
Json config_to_json(const Config& c);
void validate_config(const Config& c);
Fq config_residue_field(const Config& c);
FieldPtr config_field(const Config& c);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::int64_t cases = 0;
    Json values = Json::object();  // exact measured quantities
    std::string message;            // first failure
};

// Property checks shared by the verification suites and the acceptance binary.
CheckResult check_witt_axioms(const FieldPtr& F, int N, int triples, std::uint64_t seed);
CheckResult check_witt_oracle(std::int64_t p, int N, int pairs, std::uint64_t seed);
CheckResult check_carry_tables(const std::vector<std::pair<std::int64_t, int>>& sizes);
CheckResult check_hensel(const FieldPtr& F, int N, int polys, std::uint64_t seed);
CheckResult check_gauss_norm(const FieldPtr& F, int N, int pairs, const std::vector<Q>& radii, std::uint64_t seed);
CheckResult check_hadamard(const FieldPtr& F, int N, int samples, std::uint64_t seed);
CheckResult check_primitives(std::int64_t p, int N, int units, std::uint64_t seed);
CheckResult check_stable_reduction(std::int64_t p, int N, int classes, std::uint64_t seed);
CheckResult check_untilt_roots(std::int64_t p, int N, int polys, int steps, std::uint64_t seed);
CheckResult check_phi_gamma(std::int64_t p, int N, int elements, std::uint64_t seed);
// gap_slack = 0 asserts the gap p^n; gap_slack = 1 asserts p^n - 1.
CheckResult check_gamma_gap(std::int64_t p, const std::vector<int>& levels, int samples, int gap_slack,
                            std::uint64_t seed);
CheckResult check_split(std::int64_t p, int N, int elements, int max_den, std::uint64_t seed);
CheckResult check_descent(std::int64_t p, int N, const std::vector<int>& ranks, int seeds, std::uint64_t seed);
CheckResult check_good_basis(std::int64_t p, int N, int seeds, std::uint64_t seed);

struct SuiteReport {
    std::string suite;
    Config config;
    std::vector<CheckResult> checks;
    bool passed() const;
};

const std::vector<std::string>& suite_names();
// name in {witt, norms, tilt, gamma, descent, all}; checks run on a worker pool and
// are merged by index.
SuiteReport run_suite(const std::string& name, const Config& c);
Json suite_report_to_json(const SuiteReport& r);
std::string suite_report_to_text(const SuiteReport& r);

}  // namespace perfectoid
