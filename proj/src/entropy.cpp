#include "pluridyn/entropy.hpp"

#include <cmath>

#include "pluridyn/parallel.hpp"
#include "pluridyn/rng.hpp"

namespace pluridyn {

OrbitCloud make_orbit_cloud(const ProjectiveMap& f, const std::vector<V3>& pts,
                            int n_max) {
    OrbitCloud cloud;
    cloud.n_max = n_max;
    cloud.orbits.resize(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        auto& orbit = cloud.orbits[i];
        orbit.resize(n_max + 1);
        V3 x = normalize3(pts[i]);
        for (int j = 0; j <= n_max; ++j) {
            orbit[j] = x / x.norm(); // Euclidean-normalized for fast distances
            if (j < n_max) x = normalize3(f.eval3(x));
        }
    });
    return cloud;
}

namespace {

// orbit-sup separation test: exists j < n with fs angle > eps, on
// Euclidean-normalized lifts |<x,y>|^2 < cos^2(eps) means angle > eps
bool orbit_separated(const std::vector<V3>& a, const std::vector<V3>& b, int n,
                     double cos2eps) {
    for (int j = 0; j < n; ++j) {
        const cplx ip = a[j].dot(b[j]);
        if (std::norm(ip) < cos2eps) return true;
    }
    return false;
}

} // namespace

int separated_count(const OrbitCloud& cloud, int n, double eps) {
    if (n > cloud.n_max + 1)
        throw DegenerateFit("orbit cloud too short for requested n");
    const double c = std::cos(eps);
    const double cos2eps = c * c;
    std::vector<const std::vector<V3>*> kept;
    for (const auto& orbit : cloud.orbits) {
        bool separated = true;
        for (const auto* k : kept) {
            if (!orbit_separated(orbit, *k, n, cos2eps)) {
                separated = false;
                break;
            }
        }
        if (separated) kept.push_back(&orbit);
    }
    return static_cast<int>(kept.size());
}

SeparationRun separation_scan(const OrbitCloud& cloud, int n_min, int n_max,
                              double eps) {
    SeparationRun run;
    run.eps = eps;
    for (int n = n_min; n <= n_max; ++n) {
        run.ns.push_back(n);
        run.counts.push_back(separated_count(cloud, n, eps));
    }
    return run;
}

double entropy_estimate(const SeparationRun& run) {
    if (run.ns.size() < 4)
        throw DegenerateFit("entropy estimate needs at least 4 values of n");
    std::vector<double> ys;
    ys.reserve(run.counts.size());
    for (int c : run.counts) {
        if (c <= 0) throw DegenerateFit("empty separated set");
        ys.push_back(static_cast<double>(c));
    }
    return fit_log_slope(run.ns, ys);
}

double graph_volume(const ProjectiveMap& f,
                    const std::function<bool(const V3&)>& in_region, int n,
                    int mc_points, std::uint64_t seed) {
    // (1/2) E_{x ~ omega^2} [ 1_W'(x) * ((tr S)^2 - tr S^2)/2 ],
    // S = sum_{i<n} H_i with H_i the FS Gram of Df^i in orthonormal frames.
    const double total = parallel_sum(
        mc_points,
        [&](std::size_t s) {
            RngStream rng(seed, 0x90f + s);
            const V3 x = random_fs_point(rng);
            if (!in_region(x)) return 0.0;
            auto [e1, e2] = fs_frame(x);
            V3 cur = x;
            V3 v1 = e1, v2 = e2;
            Eigen::Matrix2cd S = Eigen::Matrix2cd::Zero();
            for (int i = 0; i < n; ++i) {
                // Gram of (v1, v2) at cur in the doubled FS pairing
                Eigen::Matrix2cd H;
                H(0, 0) = 2.0 * fs_herm(cur, v1, v1);
                H(0, 1) = 2.0 * fs_herm(cur, v1, v2);
                H(1, 0) = std::conj(H(0, 1));
                H(1, 1) = 2.0 * fs_herm(cur, v2, v2);
                S += H;
                if (i + 1 < n) {
                    const M3 J = f.jacobian3(cur);
                    V3 nxt = f.eval3(cur);
                    v1 = J * v1;
                    v2 = J * v2;
                    const double sc = nxt.cwiseAbs().maxCoeff();
                    nxt /= sc;
                    v1 /= sc;
                    v2 /= sc;
                    cur = nxt;
                }
            }
            const double trS = S.trace().real();
            const double trS2 = (S * S).trace().real();
            return 0.5 * (trS * trS - trS2);
        },
        64);
    return 0.5 * total / mc_points;
}

VolumeGrowthRun volume_growth_scan(
    const ProjectiveMap& f, const std::function<bool(const V3&)>& in_region,
    int n_min, int n_max, int mc_points, std::uint64_t seed) {
    VolumeGrowthRun run;
    std::vector<double> logs;
    for (int n = n_min; n <= n_max; ++n) {
        const double v = graph_volume(f, in_region, n, mc_points, seed);
        run.ns.push_back(n);
        run.volumes.push_back(v);
    }
    run.rate = fit_log_slope(run.ns, run.volumes);
    return run;
}

} // namespace pluridyn
