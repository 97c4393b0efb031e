#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "pluridyn/endomorphism.hpp"
#include "pluridyn/projective.hpp"

namespace pluridyn {

// ============================================================================
// Numerical positive closed (1,1)-currents in P^2 (the k-p = 1 engine):
// weighted quadrature nodes with unit tangent frames. A node carries the FS
// area element `w` of the piece of curve it represents; pairing against a
// (1,1)-form is the quadrature sum of form densities on the tangent planes.
//
// Every (1,1)-form is represented by its "Hessian density": the value H(x, v)
// with  form|_{line x + t v} = (i/pi) H dt^dtbar , so that the density
// against FS area is H / H_omega. Pairing with omega itself gives the mass.
// ============================================================================

// ---- test forms -------------------------------------------------------------

class ScalarField; // observables with one-jet/Hessian data, defined below

class TestForm {
public:
    // omega_FS
    static TestForm omega();
    // A^* omega_FS for a projective-linear A (dd^c-closed)
    static TestForm pulled_omega(const M3& A);
    // chi * omega for a smooth scalar; dd^c-positivity is the caller's claim
    static TestForm cutoff_omega(std::function<double(const V3&)> chi,
                                 std::string label = "cutoff");
    // smooth bump chi(fs(x, center)) supported in fs < r_out, equal to 1 on
    // fs < r_in, times omega
    static TestForm bump_omega(const V3& center, double r_in, double r_out);
    // sum_j (psi . A_j) A_j^* omega with psi the squared fiber radius of cp:
    // strictly dd^c-positive near the cone regions (trace form argument).
    static TestForm strict_positive(const CenterProjection& cp,
                                    const std::vector<M3>& autos);
    // dd^c u for a scalar field with exact directional Hessians
    static TestForm ddc(const std::shared_ptr<ScalarField>& u);
    // (d(v d^c u))^{1,1} = dv ^ d^c u (1,1-part) + v dd^c u
    static TestForm d_of_vdcu(const std::shared_ptr<ScalarField>& v,
                              const std::shared_ptr<ScalarField>& u);

    TestForm operator+(const TestForm& o) const;
    TestForm operator*(double k) const;

    double hessian(const V3& x, const V3& v) const;
    // density against FS area on the tangent plane (x, v)
    double density(const V3& x, const V3& v) const;
    const std::string& label() const { return label_; }

private:
    struct Atom {
        enum Kind { kPulled, kCutoff, kDdc, kMixed } kind = kPulled;
        double coeff = 1.0;
        M3 A = M3::Identity();
        std::function<double(const V3&)> chi;
        std::shared_ptr<ScalarField> u, v;
    };
    std::vector<Atom> atoms_;
    std::string label_;
};

// Smooth observable u_B(x) = |Bx|^2/|x|^2 (range = [lambda_min, lambda_max]
// of B^H B) with exact directional derivatives; the workhorse scalar for
// decay, mixing and invariance diagnostics.
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual double value(const V3& x) const = 0;
    // first derivative of t -> u(x + t v) at 0
    virtual cplx dir_deriv(const V3& x, const V3& v) const = 0;
    // mixed second derivative d/dt d/dtbar at 0
    virtual double dir_hessian(const V3& x, const V3& v) const = 0;
    virtual double sup_norm() const = 0;
};

std::shared_ptr<ScalarField> quadratic_ratio_field(const M3& B);
std::shared_ptr<ScalarField> constant_field(double c);
// a seeded random quadratic-ratio observable
std::shared_ptr<ScalarField> random_observable(std::uint64_t seed, int index);

// ---- sampled currents ----------------------------------------------------------

struct CurveNode {
    V3 x;       // sup-normalized point
    V3 t;       // tangent representative, FS-unit
    double w;   // FS area element
    float ring; // source ring index (refinement bookkeeping)
    double phi; // source angle
    double u;   // source polar parameter
    double aux; // scalar slot (phi-weights for non-closed currents)
};

struct LineSource {
    V3 b0, b1;               // orthonormal lift frame of the source line
    const ProjectiveMap* map = nullptr;
    int steps = 0;           // the current is (f^steps)_* [line]
    V3 point(double phi, double u) const; // FS-uniform chart of the line
};

struct SampledCurrent {
    std::vector<CurveNode> nodes;
    int generation = 0;
    double mass_scale = 1.0; // the d^{-(k-p)n} normalization applied
    std::optional<LineSource> source;

    double unnormalized_mass() const;
    double mass() const { return unnormalized_mass() * mass_scale; }

    void save_csv(std::ostream& out) const;
};

struct RefinePolicy {
    double max_gap = 0.01;        // FS distance between adjacent image nodes
    std::size_t node_budget = 10'000'000;
    int rings = 48;               // Gauss-Legendre rings in the polar parameter
    int base_phi = 64;            // initial nodes per ring
};

// Uniform FS-area quadrature of a projective line; mass is 1 by construction
// of the weights (product Gauss x periodic-trapezoid rule on the round P^1).
SampledCurrent line_current(const LinearSubspace& line, int node_target);
SampledCurrent line_current_frames(const V3& b0, const V3& b1, int node_target);

// Nodes mapped by f^steps, tangents by the chained Jacobian, weights by the
// squared FS tangent stretch; mass_scale is multiplied by d^{-steps}.
// Adaptive per-ring refinement keeps adjacent image gaps below max_gap when
// the current carries its line parametrization.
SampledCurrent pushforward(const SampledCurrent& S, const ProjectiveMap& f,
                           int steps, const RefinePolicy& policy = {});

double pair_form(const SampledCurrent& S, const TestForm& form);

// <S, phi * form> for a scalar weight phi on the source nodes
double pair_form_weighted(const SampledCurrent& S, const ScalarField& phi,
                          const TestForm& form);

// Adjoint-route pairing: <d^{-n}(f^n)_*(phi S), form> evaluated on the source
// quadrature through orbit tangent stretches (exact adjointness, no image
// refinement). phi may be null (treated as 1).
double pair_pushforward_pullback(const SampledCurrent& S,
                                 const ProjectiveMap& f, int n,
                                 const ScalarField* phi, const TestForm& form);

// ---- structural discs -----------------------------------------------------------

// The disc theta -> R_theta := sum_i rho_i (lambda_theta(A_i))_* (A_theta)_* R
// with A_theta = P_L + theta P_I the fiber scaling and lambda_theta(A) the
// chart interpolation Id + (1-theta)(A - Id). R_1 is the rho-average of the
// A_i-pushforwards of the base; R_0 is a rho-average of line currents [A_i(L)]
// independent of the base.
struct StructuralDisc {
    SampledCurrent base;
    std::vector<std::pair<M3, double>> automorphism_samples; // (A_i, rho_i)
    CenterProjection projection;
    double theta_radius = 0.2; // V = this neighbourhood of [0,1]

    bool theta_in_domain(cplx theta) const;
    M3 composite_matrix(cplx theta, const M3& A) const;
    SampledCurrent evaluate(cplx theta) const;
};

StructuralDisc make_structural_disc(const SampledCurrent& base,
                                    const CenterProjection& cp, int n_autos,
                                    double radius, std::uint64_t seed);

std::vector<double> slice_mass_scan(const StructuralDisc& D,
                                    const std::vector<cplx>& thetas);

struct SubharmonicitySample {
    cplx theta;
    double radius;
    double circle_mean_minus_center; // >= -tol for psh pairings
};

struct SubharmonicityReport {
    std::vector<SubharmonicitySample> samples;
    double worst_deficit = 0.0; // most negative circle_mean_minus_center
    int flagged = 0;            // samples below -tol
};

SubharmonicityReport subharmonicity_report(const StructuralDisc& D,
                                           const TestForm& form,
                                           const std::vector<cplx>& theta_grid,
                                           const std::vector<double>& radii,
                                           double tol, int circle_points = 16);

// ---- decay-rate diagnostics -------------------------------------------------------

struct DecayRates {
    std::vector<double> ddc_pairings; // a_n = <d^{-n}(f^n)_*(phi S), dd^c u>
    std::vector<double> d_pairings;   // b_n via the mixed (d v ^ d^c u) form
    double ddc_slope = 0.0;           // fitted slope of log|a_n| vs n
    double d_slope = 0.0;
    int n_min = 2;
};

// Computes the pairings through the adjoint identities on the source
// quadrature and fits least-squares slopes over n = n_min..n_max.
// Throws DegenerateFit when the values sit at the quadrature noise floor.
DecayRates decay_rates(const SampledCurrent& S, const ProjectiveMap& f,
                       const std::shared_ptr<ScalarField>& phi,
                       const std::shared_ptr<ScalarField>& u,
                       const std::shared_ptr<ScalarField>& v, int n_min,
                       int n_max);

// least-squares slope of log|y| against n, used by decay and entropy fits
double fit_log_slope(const std::vector<int>& ns, const std::vector<double>& ys);

} // namespace pluridyn
