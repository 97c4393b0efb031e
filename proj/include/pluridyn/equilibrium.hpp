#pragma once

#include "pluridyn/attractor.hpp"

namespace pluridyn {

// nu = T^{k-p} ^ tau through the averaged intersection
//   (1/n) sum_{j<n} d^{-n} (f^j)_*[L'] ^ (f^{n-j})^* omega ,
// which turns the wedge into tangent-stretch densities on the pushforward
// curves: atom weight = w_node * |D(f^{n-j}) t|_FS^2 * d^{-n} / n.
struct NuApproximant {
    DiscreteMeasure measure; // normalized to mass 1
    double raw_mass = 0.0;   // Cesaro mass before the final normalization
    int n = 0;
    std::string mode;        // "density" or "exact"
    std::uint64_t map_hash = 0;
};

NuApproximant nu_sample(const ProjectiveMap& f, const TrappingRegion& U,
                        const LinearSubspace& Lprime, int n,
                        const RefinePolicy& policy = {});

// Exact backend (n <= 4, d = 2): atoms at the Bezout intersections of the
// implicitized image curves f^j(L') with the pullback curves (f^{n-j})^*[H]
// of a fixed generic line H, weighted by multiplicities.
NuApproximant nu_exact_small(const ProjectiveMap& f, const TrappingRegion& U,
                             const LinearSubspace& Lprime, int n,
                             std::uint64_t seed = 23);

// max over observables of |<nu, phi . f> - <nu, phi>|
double invariance_gap(const NuApproximant& nu, const ProjectiveMap& f,
                      const std::vector<std::shared_ptr<ScalarField>>& obs);

// C_n = <nu, phi (psi . f^n)> - <nu, phi><nu, psi> for n in [1, n_max]
std::vector<double> mixing_correlation(const NuApproximant& nu,
                                       const ProjectiveMap& f,
                                       const ScalarField& phi,
                                       const ScalarField& psi, int n_max);

} // namespace pluridyn
