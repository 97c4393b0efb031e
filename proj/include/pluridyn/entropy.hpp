#pragma once

#include "pluridyn/attractor.hpp"

namespace pluridyn {

// (n, eps)-separated set machinery: greedy maximal packing in the orbit-sup
// metric (a lower bound for the true maximum), volume growth of the iterated
// graph, and least-squares rate fits.

struct OrbitCloud {
    // orbits[i][j] = Euclidean-normalized lift of f^j(x_i), j = 0..n_max
    std::vector<std::vector<V3>> orbits;
    int n_max = 0;
};

OrbitCloud make_orbit_cloud(const ProjectiveMap& f, const std::vector<V3>& pts,
                            int n_max);

// greedy maximal (n, eps)-separated subset size
int separated_count(const OrbitCloud& cloud, int n, double eps);

struct SeparationRun {
    std::vector<int> ns;
    std::vector<int> counts;
    double eps = 0.0;
    // verifiable certificate: the kept family is pairwise separated by
    // construction; re-check is a test-side concern
};

SeparationRun separation_scan(const OrbitCloud& cloud, int n_min, int n_max,
                              double eps);

// least-squares slope of log(count) vs n; DegenerateFit on fewer than 4
// points or non-positive counts.
double entropy_estimate(const SeparationRun& run);

struct VolumeGrowthRun {
    std::vector<int> ns;
    std::vector<double> volumes;
    double rate = 0.0; // fitted slope of log V_n
    double variance_last = 0.0;
};

// Monte-Carlo estimate of volume(Pi^{-1}(W') cap Gamma_[n]) =
// (1/k!) int_{W'} (sum_{i<n} (f^i)^* omega)^k through Gram matrices of the
// chained differentials in FS-orthonormal frames.
double graph_volume(const ProjectiveMap& f,
                    const std::function<bool(const V3&)>& in_region, int n,
                    int mc_points, std::uint64_t seed);

VolumeGrowthRun volume_growth_scan(const ProjectiveMap& f,
                                   const std::function<bool(const V3&)>& in_region,
                                   int n_min, int n_max, int mc_points,
                                   std::uint64_t seed);

} // namespace pluridyn
