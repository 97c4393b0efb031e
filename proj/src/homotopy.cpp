// Preimage solving for k=2 endomorphisms: f(z) = w is reduced to the
// intersection of two degree-d curves  F_i w_m - F_m w_i = 0  (m the largest
// target coordinate), tracked by predictor-corrector homotopy continuation
// from the power-map start system  z_i^d w_m - z_m^d w_i.

#include <algorithm>
#include <cmath>

#include "pluridyn/endomorphism.hpp"
#include "pluridyn/rng.hpp"

namespace pluridyn {

namespace {

struct FiberSystem {
    const ProjectiveMap* f;
    V3 w;      // sup-normalized target
    int m;     // pivot coordinate (largest |w_i|)
    int i1, i2; // the two free indices
    cplx gamma;
    V3 slice;  // affine chart c . z = 1

    // target equations G(z), start equations S(z), and the homotopy
    void target(const V3& z, cplx& g1, cplx& g2) const {
        const V3 F = f->eval3(z);
        g1 = F(i1) * w(m) - F(m) * w(i1);
        g2 = F(i2) * w(m) - F(m) * w(i2);
    }
    void start(const V3& z, cplx& s1, cplx& s2) const {
        const int d = f->d;
        cplx zm = 1.0;
        for (int j = 0; j < d; ++j) zm *= z(m);
        cplx z1 = 1.0, z2 = 1.0;
        for (int j = 0; j < d; ++j) {
            z1 *= z(i1);
            z2 *= z(i2);
        }
        s1 = z1 * w(m) - zm * w(i1);
        s2 = z2 * w(m) - zm * w(i2);
    }
    void homotopy(const V3& z, double t, Eigen::Vector3cd& H, M3& J) const {
        cplx g1, g2, s1, s2;
        target(z, g1, g2);
        start(z, s1, s2);
        const cplx om = gamma * (1.0 - t);
        H(0) = om * s1 + t * g1;
        H(1) = om * s2 + t * g2;
        H(2) = slice(0) * z(0) + slice(1) * z(1) + slice(2) * z(2) - cplx(1.0);

        const M3 JF = f->jacobian3(z);
        const int d = f->d;
        // start-system jacobian rows
        cplx zm1 = static_cast<double>(d), z11 = static_cast<double>(d),
             z21 = static_cast<double>(d);
        for (int j = 0; j < d - 1; ++j) {
            zm1 *= z(m);
            z11 *= z(i1);
            z21 *= z(i2);
        }
        for (int col = 0; col < 3; ++col) {
            cplx dg1 = JF(i1, col) * w(m) - JF(m, col) * w(i1);
            cplx dg2 = JF(i2, col) * w(m) - JF(m, col) * w(i2);
            cplx ds1 = (col == i1 ? z11 * w(m) : cplx(0)) -
                       (col == m ? zm1 * w(i1) : cplx(0));
            cplx ds2 = (col == i2 ? z21 * w(m) : cplx(0)) -
                       (col == m ? zm1 * w(i2) : cplx(0));
            J(0, col) = om * ds1 + t * dg1;
            J(1, col) = om * ds2 + t * dg2;
            J(2, col) = slice(col);
        }
    }
    void dhdt(const V3& z, Eigen::Vector3cd& Ht) const {
        cplx g1, g2, s1, s2;
        target(z, g1, g2);
        start(z, s1, s2);
        Ht(0) = g1 - gamma * s1;
        Ht(1) = g2 - gamma * s2;
        Ht(2) = 0.0;
    }
};

// principal d-th root
cplx droot(cplx z, int d) { return std::pow(z, 1.0 / static_cast<double>(d)); }

bool newton_at(const FiberSystem& sys, V3& z, double t, double tol, int iters) {
    for (int it = 0; it < iters; ++it) {
        Eigen::Vector3cd H;
        M3 J;
        sys.homotopy(z, t, H, J);
        const Eigen::Vector3cd dz = J.fullPivLu().solve(-H);
        z += dz;
        if (dz.norm() <= tol * (1.0 + z.norm())) {
            sys.homotopy(z, t, H, J);
            return H.head<2>().norm() <= 1e-6 * (1.0 + z.norm());
        }
    }
    return false;
}

// track one path from a start root to t=1; returns false on divergence
bool track_path(const FiberSystem& sys, V3 z, int max_steps, double polish_tol,
                V3& out) {
    double t = 0.0, dt = 0.05;
    int steps = 0;
    while (t < 1.0 && steps++ < max_steps) {
        double tn = std::min(1.0, t + dt);
        // Euler predictor
        Eigen::Vector3cd H, Ht;
        M3 J;
        sys.homotopy(z, t, H, J);
        sys.dhdt(z, Ht);
        const Eigen::Vector3cd dz = J.fullPivLu().solve(-(Ht * (tn - t)));
        V3 zp = z + dz;
        if (newton_at(sys, zp, tn, 1e-11, 4)) {
            z = zp;
            t = tn;
            dt = std::min(0.2, dt * 1.7);
            if (z.norm() > 1e8) return false; // path to infinity / off slice
        } else {
            dt *= 0.35;
            if (dt < 1e-10) return false;
        }
    }
    if (t < 1.0) return false;
    // final polish on the target system
    for (int it = 0; it < 60; ++it) {
        Eigen::Vector3cd H;
        M3 J;
        sys.homotopy(z, 1.0, H, J);
        if (H.norm() <= polish_tol * (1.0 + std::pow(z.norm(), sys.f->d)))
            break;
        const Eigen::Vector3cd dz = J.fullPivLu().solve(-H);
        z += dz;
    }
    out = z;
    return true;
}

struct RawFiber {
    std::vector<V3> points; // normalized, one per path
};

bool solve_fiber_once(const ProjectiveMap& f, const V3& w_in,
                      const PreimageOptions& opts, std::uint64_t salt,
                      RawFiber& out) {
    FiberSystem sys;
    sys.f = &f;
    sys.w = normalize3(w_in);
    sys.m = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(sys.w(i)) > std::abs(sys.w(sys.m))) sys.m = i;
    sys.i1 = (sys.m + 1) % 3;
    sys.i2 = (sys.m + 2) % 3;

    RngStream rng(opts.seed ^ salt, 0x9f2e);
    sys.gamma = rng.next_unit_complex();
    for (int i = 0; i < 3; ++i)
        sys.slice(i) = rng.next_gaussian() + cplx(i == sys.m ? 1.5 : 0.0, 0.0);
    sys.slice /= sys.slice.norm();

    const int d = f.d;
    const cplx r1 = droot(sys.w(sys.i1) / sys.w(sys.m), d);
    const cplx r2 = droot(sys.w(sys.i2) / sys.w(sys.m), d);
    out.points.clear();
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const cplx za = r1 * std::polar(1.0, 2.0 * M_PI * a / d);
            const cplx zb = r2 * std::polar(1.0, 2.0 * M_PI * b / d);
            V3 z;
            z(sys.m) = 1.0;
            z(sys.i1) = za;
            z(sys.i2) = zb;
            const cplx sc = sys.slice(0) * z(0) + sys.slice(1) * z(1) +
                            sys.slice(2) * z(2);
            if (std::abs(sc) < 1e-8) return false; // bad slice, retry
            z /= sc;
            V3 sol;
            if (!track_path(sys, z, opts.max_steps, opts.polish_tol, sol))
                return false;
            out.points.push_back(normalize3(sol));
        }
    // verify: each solution maps back to w
    for (const auto& p : out.points)
        if (fs_distance3(normalize3(f.eval3(p)), sys.w) > 1e-8) return false;
    return true;
}

bool lex_less(const V3& a, const V3& b) {
    for (int i = 0; i < 3; ++i) {
        if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
        if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
    }
    return false;
}

std::vector<PreimagePoint> cluster_fiber(const RawFiber& raw, double tol,
                                         bool throw_on_critical) {
    std::vector<V3> pts = raw.points;
    std::sort(pts.begin(), pts.end(), lex_less);
    std::vector<PreimagePoint> out;
    std::vector<bool> used(pts.size(), false);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (used[i]) continue;
        int mult = 1;
        used[i] = true;
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (used[j]) continue;
            if (fs_distance3(pts[i], pts[j]) <= tol) {
                used[j] = true;
                ++mult;
            }
        }
        if (mult > 1 && throw_on_critical)
            throw CriticalValue("clustered fiber roots (multiplicity " +
                                std::to_string(mult) + ")");
        PreimagePoint pp;
        pp.point = HomogeneousPoint::from3(pts[i]);
        pp.multiplicity = mult;
        out.push_back(std::move(pp));
    }
    return out;
}

std::vector<PreimagePoint> solve_fiber(const ProjectiveMap& f, const V3& w,
                                       const PreimageOptions& opts) {
    RawFiber raw;
    for (std::uint64_t retry = 0; retry < 6; ++retry) {
        if (solve_fiber_once(f, w, opts, retry * 0x9e3779b97f4a7c15ull, raw))
            return cluster_fiber(raw, opts.cluster_tol, opts.throw_on_critical);
    }
    throw SolverFailure("homotopy paths failed to converge for fiber solve");
}

} // namespace

std::vector<PreimagePoint> preimages(const ProjectiveMap& f,
                                     const HomogeneousPoint& a, int n,
                                     const PreimageOptions& opts) {
    if (f.k != 2) throw WrongDimension("preimages: k=2 solver");
    std::vector<PreimagePoint> level;
    {
        PreimagePoint root;
        root.point = normalize(a);
        root.multiplicity = 1;
        level.push_back(root);
    }
    for (int step = 0; step < n; ++step) {
        std::vector<PreimagePoint> next;
        for (const auto& node : level) {
            auto fiber = solve_fiber(f, node.point.v3(), opts);
            for (auto& q : fiber) {
                q.multiplicity *= node.multiplicity;
                next.push_back(std::move(q));
            }
        }
        level = std::move(next);
    }
    std::sort(level.begin(), level.end(),
              [](const PreimagePoint& x, const PreimagePoint& y) {
                  return lex_less(x.point.v3(), y.point.v3());
              });
    return level;
}

V3 preimage_walk(const ProjectiveMap& f, const V3& a, int n, RngStream& rng,
                 const PreimageOptions& opts) {
    V3 cur = normalize3(a);
    for (int step = 0; step < n; ++step) {
        auto fiber = solve_fiber(f, cur, opts);
        std::sort(fiber.begin(), fiber.end(),
                  [](const PreimagePoint& x, const PreimagePoint& y) {
                      return lex_less(x.point.v3(), y.point.v3());
                  });
        // uniform over the d^k branches counted with multiplicity
        int total = 0;
        for (const auto& q : fiber) total += q.multiplicity;
        int pick = static_cast<int>(rng.next_below(total));
        for (const auto& q : fiber) {
            pick -= q.multiplicity;
            if (pick < 0) {
                cur = q.point.v3();
                break;
            }
        }
    }
    return cur;
}

} // namespace pluridyn
