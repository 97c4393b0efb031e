#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pluridyn/projective.hpp"

namespace pluridyn {

// Holomorphic endomorphism of P^k given by k+1 homogeneous polynomials of a
// common degree d >= 2 in k+1 variables, stored sparsely. The k=2 evaluation
// and Jacobian paths are compiled to flat term lists (no allocation).
struct ProjectiveMap {
    struct Monomial {
        std::vector<int> exps; // k+1 exponents summing to d
        cplx coeff;
    };

    int k = 2;
    int d = 2;
    std::vector<std::vector<Monomial>> components; // size k+1

    // --- construction / io
    static ProjectiveMap power_map(int k, int d);
    // [z0^2 + eps z1 z2 : z1^2 + eps z0 z2 : z2^2], the standard perturbed
    // power map of the k=2 experiments.
    static ProjectiveMap perturbed_power(double eps);
    // `pmap k=<int> d=<int>` header, then one monomial per line:
    // component_index exponent_0 ... exponent_k re im. Inhomogeneous input is
    // rejected.
    static ProjectiveMap parse(std::istream& in);
    static ProjectiveMap load(const std::string& path);
    void write(std::ostream& out) const;
    std::uint64_t content_hash() const;

    // --- evaluation
    CVec eval(const CVec& z) const;
    V3 eval3(const V3& z) const;
    M3 jacobian3(const V3& z) const;

    void compile(); // builds the k=2 fast path; called by factories/parse
    bool fast_ready() const { return !fast_.empty(); }

    struct FastTerm {
        int e0, e1, e2;
        cplx c;
    };
    const std::vector<std::vector<FastTerm>>& fast() const { return fast_; }

private:
    std::vector<std::vector<FastTerm>> fast_;
};

// ---- basic dynamics ---------------------------------------------------------

HomogeneousPoint evaluate(const ProjectiveMap& f, const HomogeneousPoint& x);
HomogeneousPoint iterate(const ProjectiveMap& f, const HomogeneousPoint& x,
                         int n);
V3 iterate3(const ProjectiveMap& f, V3 x, int n); // renormalizes each step

// Pushforward of a tangent vector by Df^n with per-step renormalization.
// stretch = |Df^n v|_FS / |v|_FS accumulated in log space (d^n growth).
struct TangentPush {
    V3 image_point;   // sup-normalized f^n(x)
    V3 image_tangent; // representative at image_point (sup-norm ~ 1)
    double log_stretch;
};
TangentPush tangent_pushforward(const ProjectiveMap& f, const V3& x,
                                const V3& v, int n);

// Jacobian data at a point: the lifted derivative matrix and the modulus of
// the projective Jacobian with respect to FS volume (real volume factor;
// |Jac| < 1 means local volume contraction).
struct JacobianData {
    M3 matrix;
    double projective_jacobian_modulus;
};
JacobianData jacobian_data(const ProjectiveMap& f, const V3& x);

// ---- validation ------------------------------------------------------------

struct ValidationReport {
    bool ok = false;
    double min_sphere_ratio = 0.0; // MC min of |F(z)|_inf on the sup sphere
    std::string detail;
    HomogeneousPoint witness; // near-common-zero when !ok
};

// Monte-Carlo minimum of |F(z)|/|z|^d on the unit sphere plus, for k = 2, an
// exact resultant-based nonvanishing check (the resultant of F0,F1,F2
// vanishes iff F2 vanishes at one of the Bezout intersections of F0, F1, or
// F0 and F1 share a component). Throws DegenerateMap on failure.
ValidationReport validate(const ProjectiveMap& f, int trials,
                          std::uint64_t seed = 1);

// ---- preimages (homotopy continuation) --------------------------------------

struct PreimageOptions {
    double polish_tol = 1e-10;  // Newton residual target
    double cluster_tol = 1e-6;  // FS distance for multiplicity clustering
    int max_steps = 10000;      // per path
    std::uint64_t seed = 7;     // gamma trick + generic affine slice
    bool throw_on_critical = false;
};

struct PreimagePoint {
    HomogeneousPoint point;
    int multiplicity = 1;
};

// All d^{kn} preimages of a under f^n, solved one step at a time over the
// preimage tree; each step tracked from the power-map start system. Results
// are sorted lexicographically on normalized coordinates, so the output does
// not depend on the traversal schedule.
std::vector<PreimagePoint> preimages(const ProjectiveMap& f,
                                     const HomogeneousPoint& a, int n,
                                     const PreimageOptions& opts = {});

// One uniformly random branch of the preimage tree, n steps down (used by
// mu_sample); deterministic given the stream.
V3 preimage_walk(const ProjectiveMap& f, const V3& a, int n, RngStream& rng,
                 const PreimageOptions& opts = {});

} // namespace pluridyn
