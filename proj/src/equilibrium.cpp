#include "pluridyn/equilibrium.hpp"

#include <cmath>

#include "pluridyn/parallel.hpp"
#include "pluridyn/rng.hpp"

namespace pluridyn {

NuApproximant nu_sample(const ProjectiveMap& f, const TrappingRegion& U,
                        const LinearSubspace& Lprime, int n,
                        const RefinePolicy& policy) {
    (void)U;
    NuApproximant out;
    out.n = n;
    out.mode = "density";
    out.map_hash = f.content_hash();

    const SampledCurrent base =
        line_current(Lprime, policy.rings * policy.base_phi);
    const double dn = std::pow(static_cast<double>(f.d), n);

    for (int j = 0; j < n; ++j) {
        const SampledCurrent Sj =
            j == 0 ? base : pushforward(base, f, j, policy);
        // (f^{n-j})^* omega restricted to the curve = |D(f^{n-j}) t|^2 * area
        std::vector<double> dens(Sj.nodes.size());
        parallel_for(Sj.nodes.size(), [&](std::size_t i) {
            const CurveNode& nd = Sj.nodes[i];
            if (nd.w == 0.0) {
                dens[i] = 0.0;
                return;
            }
            try {
                const TangentPush tp =
                    tangent_pushforward(f, nd.x, nd.t, n - j);
                dens[i] = std::exp(2.0 * tp.log_stretch);
            } catch (const SolverFailure&) {
                dens[i] = 0.0;
            }
        });
        for (std::size_t i = 0; i < Sj.nodes.size(); ++i) {
            const CurveNode& nd = Sj.nodes[i];
            const double w = nd.w * dens[i] / dn / n;
            if (w <= 0.0) continue;
            out.measure.atoms.emplace_back(HomogeneousPoint::from3(nd.x), w);
        }
    }
    out.raw_mass = out.measure.total_mass();
    out.measure.normalize_mass();
    return out;
}

NuApproximant nu_exact_small(const ProjectiveMap& f, const TrappingRegion& U,
                             const LinearSubspace& Lprime, int n,
                             std::uint64_t seed) {
    (void)U;
    if (n > 4) throw PrecisionExhausted("nu_exact_small supports n <= 4");
    NuApproximant out;
    out.n = n;
    out.mode = "exact";
    out.map_hash = f.content_hash();

    // fixed generic line H representing omega in cohomology
    RngStream rng(seed, 0xeac7);
    V3 hform;
    for (int i = 0; i < 3; ++i) hform(i) = rng.next_gaussian();
    hform /= hform.norm();
    HomPoly2 H = HomPoly2::zero(1);
    H.at(1, 0) = MpComplex(hform(0));
    H.at(0, 1) = MpComplex(hform(1));
    H.at(0, 0) = MpComplex(hform(2));

    const double dn = std::pow(static_cast<double>(f.d), n);
    for (int j = 0; j < n; ++j) {
        // implicitize f^j(L'): (f^j)_*[L'] = mult_j [C_j]
        const ImplicitCurve Cj = implicitize_image(Lprime, f, j);
        // pullback curve (f^{n-j})^*[H] = [H . F^{n-j}]
        HomPoly2 pull = H;
        for (int s = 0; s < n - j; ++s) pull = pullback_curve(f, pull);
        const auto inter = intersect_curves(Cj.poly, pull, seed + 31 * j);
        for (const auto& ci : inter) {
            const double w =
                static_cast<double>(Cj.multiplicity) * ci.multiplicity / dn / n;
            out.measure.atoms.emplace_back(ci.point, w);
        }
    }
    out.raw_mass = out.measure.total_mass();
    out.measure.normalize_mass();
    return out;
}

double invariance_gap(const NuApproximant& nu, const ProjectiveMap& f,
                      const std::vector<std::shared_ptr<ScalarField>>& obs) {
    double worst = 0.0;
    for (const auto& o : obs) {
        const double direct = nu.measure.integrate(
            [&](const V3& x) { return o->value(x); });
        const double pushed = nu.measure.integrate(
            [&](const V3& x) { return o->value(iterate3(f, x, 1)); });
        worst = std::max(worst, std::abs(pushed - direct));
    }
    return worst;
}

std::vector<double> mixing_correlation(const NuApproximant& nu,
                                       const ProjectiveMap& f,
                                       const ScalarField& phi,
                                       const ScalarField& psi, int n_max) {
    const auto& atoms = nu.measure.atoms;
    std::vector<double> phi_vals(atoms.size());
    std::vector<V3> orbit(atoms.size());
    double mean_phi = 0.0, mean_psi = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const V3 x = atoms[i].first.v3();
        phi_vals[i] = phi.value(x);
        orbit[i] = x;
        mean_phi += atoms[i].second * phi_vals[i];
        mean_psi += atoms[i].second * psi.value(x);
    }
    std::vector<double> corr;
    corr.reserve(n_max);
    for (int n = 1; n <= n_max; ++n) {
        parallel_for(orbit.size(),
                     [&](std::size_t i) { orbit[i] = iterate3(f, orbit[i], 1); });
        double c = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i)
            c += atoms[i].second * phi_vals[i] * psi.value(orbit[i]);
        corr.push_back(c - mean_phi * mean_psi);
    }
    return corr;
}

} // namespace pluridyn
