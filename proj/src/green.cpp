#include "pluridyn/green.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "pluridyn/parallel.hpp"
#include "pluridyn/rng.hpp"

namespace pluridyn {

GreenField GreenField::make(const ProjectiveMap& f, int depth,
                            int tail_samples, std::uint64_t seed) {
    GreenField g;
    g.map = &f;
    g.depth = depth;
    // M = sup over the sup-norm unit sphere of |log |F(z)|_inf|. Sampled
    // per face {|z_i| = 1, |z_j| <= 1} with a 5% safety margin; each report
    // carries the sample count through the CLI config.
    RngStream rng(seed, 0x9e37);
    const int k = f.k;
    double m = 0.0;
    for (int s = 0; s < tail_samples; ++s) {
        CVec z(k + 1);
        const int face = static_cast<int>(rng.next_below(k + 1));
        for (int i = 0; i <= k; ++i) {
            if (i == face) {
                z(i) = rng.next_unit_complex();
            } else {
                const double r = std::sqrt(rng.next_double());
                z(i) = r * rng.next_unit_complex();
            }
        }
        const CVec w = f.eval(z);
        double sup = 0.0;
        for (int i = 0; i <= k; ++i) sup = std::max(sup, std::abs(w(i)));
        if (sup > 0.0) m = std::max(m, std::abs(std::log(sup)));
    }
    g.tail_constant = 1.05 * m;
    return g;
}

double GreenField::value_at_depth(const V3& x, int n) const {
    V3 z = normalize3(x);
    // sup-normalize with a real scale so log terms are exact
    double sup = z.cwiseAbs().maxCoeff();
    z /= sup;
    double acc = 0.0;
    double dn = 1.0;
    for (int j = 0; j < n; ++j) {
        dn *= map->d;
        V3 w = map->eval3(z);
        const double s = w.cwiseAbs().maxCoeff();
        acc += std::log(s) / dn;
        z = w / s;
    }
    return acc;
}

std::pair<double, double> GreenField::value(const HomogeneousPoint& x) const {
    const double v = value_at_depth(x.v3(), depth);
    const double bound =
        tail_constant * std::pow(static_cast<double>(map->d), -depth) /
        (map->d - 1);
    return {v, bound};
}

// ---- discrete measures --------------------------------------------------------

double DiscreteMeasure::total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.second;
    return m;
}

void DiscreteMeasure::normalize_mass() {
    const double m = total_mass();
    if (m <= 0.0) throw ZeroVector("normalizing a measure of mass zero");
    for (auto& a : atoms) a.second /= m;
}

void DiscreteMeasure::save_csv(std::ostream& out) const {
    char buf[64];
    for (const auto& [p, w] : atoms) {
        for (Eigen::Index i = 0; i < p.coords.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,", p.coords(i).real(),
                          p.coords(i).imag());
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g", w);
        out << buf << "\n";
    }
}

DiscreteMeasure DiscreteMeasure::load_csv(std::istream& in) {
    DiscreteMeasure m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() % 2 != 1 || vals.size() < 3)
            throw ParseError("bad measure csv row: " + line);
        const int n = static_cast<int>(vals.size() / 2);
        CVec c(n);
        for (int i = 0; i < n; ++i) c(i) = cplx(vals[2 * i], vals[2 * i + 1]);
        m.atoms.emplace_back(HomogeneousPoint(std::move(c)), vals.back());
    }
    return m;
}

double DiscreteMeasure::integrate(
    const std::function<double(const V3&)>& obs) const {
    double acc = 0.0;
    for (const auto& [p, w] : atoms) acc += w * obs(p.v3());
    return acc;
}

DiscreteMeasure mu_sample(const ProjectiveMap& f, int n, int count,
                          std::uint64_t seed, const HomogeneousPoint* start) {
    if (f.k != 2) throw WrongDimension("mu_sample: k=2 solver");
    V3 a;
    if (start) {
        a = start->v3();
    } else {
        RngStream rng(seed, 0x57a1); // generic FS-uniform start
        a = random_fs_point(rng);
    }
    std::vector<V3> ends(count);
    parallel_for(count, [&](std::size_t w) {
        RngStream walk_rng(seed, 1000 + w);
        PreimageOptions opts;
        opts.seed = seed ^ (0x51ed0 + w);
        ends[w] = preimage_walk(f, a, n, walk_rng, opts);
    });
    DiscreteMeasure m;
    m.atoms.reserve(count);
    const double wgt = 1.0 / count;
    for (const auto& e : ends)
        m.atoms.emplace_back(HomogeneousPoint::from3(e), wgt);
    return m;
}

// ---- quasi-potentials -----------------------------------------------------------

QuasiPotential canonical_potential_of_curve(const HomPoly2& P,
                                            const HomogeneousPoint& I) {
    const V3 i3 = I.v3();
    const double at_center = curve_log_potential(P, i3);
    if (!std::isfinite(at_center))
        throw CenterOnCurve("the center I lies on the curve");
    // capture P by value; evaluation is on sup-normalized lifts
    auto Pc = std::make_shared<HomPoly2>(P);
    QuasiPotential q;
    q.evaluator = [Pc, at_center](const V3& x) {
        return curve_log_potential(*Pc, x) - at_center;
    };
    return q;
}

QuasiPotential canonical_potential_of_pushforward(const ImplicitCurve& curve,
                                                  int n, int d,
                                                  const HomogeneousPoint& I) {
    // d^{-n} (f^n)_*[L'] = d^{-n} mult [C]; its potential is
    // d^{-n} mult deg(C) times the normalized curve potential of C, and
    // d^{-n} mult deg(C) = 1 exactly.
    const double dn = std::pow(static_cast<double>(d), n);
    const double scale = curve.multiplicity * curve.poly.degree / dn;
    const QuasiPotential base = canonical_potential_of_curve(curve.poly, I);
    QuasiPotential q;
    q.evaluator = [base, scale](const V3& x) { return scale * base.value3(x); };
    return q;
}

double submeanvalue_worst_deficit(const QuasiPotential& g, int discs,
                                  double r_max, double curvature_c,
                                  std::uint64_t seed) {
    RngStream rng(seed, 0x50b);
    double worst = 0.0;
    const int circle_pts = 48;
    for (int t = 0; t < discs; ++t) {
        const V3 x = random_fs_point(rng);
        const V3 v = random_fs_tangent(x, rng);
        const double r = r_max * (0.2 + 0.8 * rng.next_double());
        const double center = g.value3(x);
        if (!std::isfinite(center)) continue; // on the curve
        double avg = 0.0;
        bool usable = true;
        for (int j = 0; j < circle_pts; ++j) {
            const double ang = 2.0 * M_PI * j / circle_pts;
            const V3 y = x + r * cplx(std::cos(ang), std::sin(ang)) * v;
            const double vy = g.value3(y);
            if (!std::isfinite(vy)) {
                usable = false;
                break;
            }
            avg += vy;
        }
        if (!usable) continue;
        avg /= circle_pts;
        // quasi-psh w.r.t. omega: mean >= center - C r^2
        const double deficit = avg - center + curvature_c * r * r;
        worst = std::min(worst, deficit);
    }
    return worst;
}

} // namespace pluridyn
