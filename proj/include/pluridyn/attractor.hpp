#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pluridyn/algebraic.hpp"
#include "pluridyn/currents.hpp"
#include "pluridyn/green.hpp"

namespace pluridyn {

// ---- trapping regions ----------------------------------------------------------

// U = {u < 0} through a defining function evaluated on sup-normalized lifts.
// Hypothesis checks are statistical certificates: sampled margins with seeds
// and sample counts recorded, not proofs.
struct TrappingRegion {
    std::string spec;                          // parseable description
    std::function<double(const V3&)> u;        // x must be sup-normalized
    CenterProjection projection;
    double validated_margin = 0.0;

    double value(const V3& x) const { return u(normalize3(x)); }
    bool inside(const V3& x) const { return value(x) < 0.0; }
    // numerical gradient of u on the lift chart (central differences)
    Eigen::Matrix<double, 6, 1> gradient(const V3& x, double h = 1e-6) const;

    // built-ins
    static TrappingRegion fiber_cone(double t); // {|z2| < t max(|z0|,|z1|)}
    static TrappingRegion counterexample();     // {max_i |z_i| > 2 min_i |z_i|}
    static TrappingRegion complement_ball(const V3& center, double radius);
    static TrappingRegion whole_space();        // vacuous input for diagnostics
    // expression over a0,a1,a2 = |z_i| (sup-normalized) and fib = fiber radius
    static TrappingRegion from_expression(const std::string& expr);
    // region file: one line, `region <builtin|expr> [args...]`
    static TrappingRegion parse(const std::string& line);
    static TrappingRegion load(const std::string& path);
};

// min over a sampled boundary shell of -u(f(x)); throws TrappingViolated with
// a witness if any sampled image leaves U.
double check_trapping(const ProjectiveMap& f, TrappingRegion& U,
                      int boundary_samples, std::uint64_t seed);

struct StarShapeReport {
    bool pass = true;
    int rays_checked = 0;
    int violations = 0;
    bool center_in_closure = false; // fiber sections reach the center I
    std::vector<std::string> witnesses;
};

// For sampled x in L and sampled fiber directions, checks that
// {t >= 0 : u(x + t dir) < 0} is an interval containing 0.
StarShapeReport check_star_shaped(const TrappingRegion& U, int rays_per_fiber,
                                  int fibers, std::uint64_t seed);

// images under f^n of a quasi-uniform sample of U
std::vector<V3> attracting_set(const ProjectiveMap& f, const TrappingRegion& U,
                               int n, int grid_size, std::uint64_t seed);

// ---- attracting current ----------------------------------------------------------

struct ConvergenceDiagnostic {
    std::vector<std::string> form_labels;
    std::vector<int> ns;
    std::vector<std::vector<double>> pairings; // [n_index][form]
    double gap_tol = 0.01;

    // |pairing(n) - pairing(n-1)| for the last rows
    std::vector<double> last_gaps() const;
    bool converged() const; // 3 consecutive gaps below gap_tol for all forms
    std::vector<double> limit_estimates() const; // defined when converged
};

struct TauResult {
    SampledCurrent tau_n;
    ConvergenceDiagnostic diag;
    bool converged = false;
    bool hypothesis_warning = false; // L' not fully inside U, etc.
};

// Normalized pushforwards d^{-n}(f^n)_*[L'] up to n_max with pairings
// recorded against the given forms. Throws NonConvergence when the Cauchy
// gaps grow instead of decaying.
TauResult attracting_current(const ProjectiveMap& f, const TrappingRegion& U,
                             const LinearSubspace& Lprime, int n_max,
                             const std::vector<TestForm>& forms,
                             const RefinePolicy& policy = {},
                             double gap_tol = 0.01);

// random projective-linear perturbation of L with the given radius
LinearSubspace perturbed_line(const LinearSubspace& L, double radius,
                              std::uint64_t seed);

// ---- counterexample ---------------------------------------------------------------

struct CounterexampleReport {
    std::vector<std::vector<double>> pairings; // [line][form]
    std::vector<int> cluster_of_line;
    double between_cluster_gap = 0.0;
    double within_cluster_gap = 0.0;
    StarShapeReport star_report;
    bool three_clusters = false;
};

// Power map with the non-star-shaped region: lines near each coordinate line
// converge to three mutually distinct limit currents.
CounterexampleReport counterexample_run(int d, int n, int lines_per_cluster,
                                        const RefinePolicy& policy,
                                        std::uint64_t seed);

// ---- canonical quasi-potential comparison -------------------------------------------

struct PotentialComparisonReport {
    double max_gs_minus_gtau_global = 0.0; // over the FS-uniform grid
    double max_abs_diff_on_U = 0.0;        // over sampled points of U
    double value_S_at_I = 0.0;             // exactly 0 by construction
    double value_tau_at_I = 0.0;
    int grid_points = 0;
    int u_points = 0;
};

PotentialComparisonReport potential_comparison(
    const ProjectiveMap& f, const TrappingRegion& U, const ImplicitCurve& S_n,
    const ImplicitCurve& tau_n, int n, int grid_points, int u_points,
    std::uint64_t seed);

// ---- jacobian contraction -------------------------------------------------------------

struct JacobianContractionReport {
    double max_jacobian = 0.0;        // sampled max of |Jac f| on U
    double max_transverse_factor = 0.0; // fiber-direction stretch
    bool uniqueness_flag = false;     // max_jacobian < 1
};

JacobianContractionReport jacobian_contraction(const ProjectiveMap& f,
                                               const TrappingRegion& U,
                                               int samples, std::uint64_t seed);

// ---- Lebesgue preimage statistic ---------------------------------------------------------

struct PreimageStatRow {
    int n;
    double mean_fraction;   // #(f^{-n}(a) cap U) / d^n averaged over a
    long long total_count;  // sum of fiber sizes with multiplicity
    long long expected_total;
    bool vacuous = false;   // U captured every preimage (degenerate input)
};

std::vector<PreimageStatRow> lebesgue_preimage_stat(const ProjectiveMap& f,
                                                    const TrappingRegion& U,
                                                    int n_max, int point_samples,
                                                    std::uint64_t seed);

// ---- run registry -----------------------------------------------------------------------

// Idempotent cache keyed by (map, region, line, seed): repeated requests for
// the same attracting-current run reuse the first computation.
class RunRegistry {
public:
    static RunRegistry& instance();
    std::shared_ptr<const TauResult> get_or_run(
        const std::string& key, const std::function<TauResult()>& compute);
    std::size_t size() const { return cache_.size(); }

private:
    std::map<std::string, std::shared_ptr<const TauResult>> cache_;
};

} // namespace pluridyn
