#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "pluridyn/algebraic.hpp"
#include "pluridyn/endomorphism.hpp"

namespace pluridyn {

// Green function g_n(x) = d^{-n} log |F^n(x~)|_inf on sup-normalized lifts,
// evaluated by per-step renormalization (the telescoping sum is exact, so the
// functional equation g_{n+1}(x) = (g_n(f x) + log|F(x~)|_inf) / d holds to
// rounding). tail_constant M = sup over the sup-norm sphere of
// |log |F(z)|_inf|, estimated by seeded Monte Carlo; the reported bound for
// |g - g_n| is M d^{-n} / (d-1).
struct GreenField {
    const ProjectiveMap* map = nullptr;
    int depth = 8;
    double tail_constant = 0.0;

    static GreenField make(const ProjectiveMap& f, int depth,
                           int tail_samples = 20000, std::uint64_t seed = 5);

    // (g_depth(x), error bound for |g - g_depth|)
    std::pair<double, double> value(const HomogeneousPoint& x) const;
    double value_at_depth(const V3& x, int n) const;
};

// ---- discrete measures -------------------------------------------------------

struct DiscreteMeasure {
    std::vector<std::pair<HomogeneousPoint, double>> atoms;

    double total_mass() const;
    void normalize_mass();
    // csv rows: re0,im0,...,rek,imk,weight
    void save_csv(std::ostream& out) const;
    static DiscreteMeasure load_csv(std::istream& in);

    double integrate(const std::function<double(const V3&)>& obs) const;
};

// Equal-weight atoms from `count` independent random walks down the preimage
// tree of a generic starting point, n steps each. Walk w uses the RNG stream
// (seed, w), so the result is independent of evaluation order.
DiscreteMeasure mu_sample(const ProjectiveMap& f, int n, int count,
                          std::uint64_t seed,
                          const HomogeneousPoint* start = nullptr);

// ---- quasi-potentials ---------------------------------------------------------

// Canonical quasi-potential of a curve current [P = 0]/deg(P): the quasi-psh
// function (1/D) log(|P(x~)|/|x~|_inf^D) normalized to vanish at the center I.
// dd^c of it is [P]/D - omega in the module's sup-norm convention.
struct QuasiPotential {
    std::function<double(const V3&)> evaluator; // already normalized at I
    double value(const HomogeneousPoint& x) const { return evaluator(x.v3()); }
    double value3(const V3& x) const { return evaluator(x); }
};

QuasiPotential canonical_potential_of_curve(const HomPoly2& P,
                                            const HomogeneousPoint& I);

// Canonical quasi-potential of the normalized pushforward
// d^{-n} (f^n)_*[L'] = d^{-n} * mult * [curve], via the exact backend.
QuasiPotential canonical_potential_of_pushforward(const ImplicitCurve& curve,
                                                  int n, int d,
                                                  const HomogeneousPoint& I);

// Sub-mean-value diagnostic: circle averages of the potential on random
// FS discs of radius <= r_max must not drop more than curvature_c * r^2
// below the center value (up to quadrature tolerance). Returns the worst
// signed deficit (negative = violation candidate).
double submeanvalue_worst_deficit(const QuasiPotential& g, int discs,
                                  double r_max, double curvature_c,
                                  std::uint64_t seed);

} // namespace pluridyn
