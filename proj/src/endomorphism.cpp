#include "pluridyn/endomorphism.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pluridyn/rng.hpp"

namespace pluridyn {

static cplx ipow(cplx z, int e) {
    cplx r = 1.0;
    while (e > 0) {
        if (e & 1) r *= z;
        z *= z;
        e >>= 1;
    }
    return r;
}

ProjectiveMap ProjectiveMap::power_map(int k, int d) {
    ProjectiveMap f;
    f.k = k;
    f.d = d;
    f.components.resize(k + 1);
    for (int i = 0; i <= k; ++i) {
        Monomial m;
        m.exps.assign(k + 1, 0);
        m.exps[i] = d;
        m.coeff = 1.0;
        f.components[i].push_back(m);
    }
    f.compile();
    return f;
}

ProjectiveMap ProjectiveMap::perturbed_power(double eps) {
    ProjectiveMap f;
    f.k = 2;
    f.d = 2;
    f.components.resize(3);
    auto mono = [](int a, int b, int c, cplx co) {
        Monomial m;
        m.exps = {a, b, c};
        m.coeff = co;
        return m;
    };
    f.components[0] = {mono(2, 0, 0, 1.0), mono(0, 1, 1, eps)};
    f.components[1] = {mono(0, 2, 0, 1.0), mono(1, 0, 1, eps)};
    f.components[2] = {mono(0, 0, 2, 1.0)};
    f.compile();
    return f;
}

void ProjectiveMap::compile() {
    fast_.clear();
    if (k != 2) return;
    fast_.resize(3);
    for (int i = 0; i < 3; ++i)
        for (const auto& m : components[i])
            fast_[i].push_back({m.exps[0], m.exps[1], m.exps[2], m.coeff});
}

CVec ProjectiveMap::eval(const CVec& z) const {
    CVec out = CVec::Zero(k + 1);
    for (int i = 0; i <= k; ++i)
        for (const auto& m : components[i]) {
            cplx t = m.coeff;
            for (int j = 0; j <= k; ++j)
                if (m.exps[j]) t *= ipow(z(j), m.exps[j]);
            out(i) += t;
        }
    return out;
}

V3 ProjectiveMap::eval3(const V3& z) const {
    V3 out(0, 0, 0);
    for (int i = 0; i < 3; ++i) {
        cplx acc = 0.0;
        for (const auto& t : fast_[i])
            acc += t.c * ipow(z(0), t.e0) * ipow(z(1), t.e1) * ipow(z(2), t.e2);
        out(i) = acc;
    }
    return out;
}

M3 ProjectiveMap::jacobian3(const V3& z) const {
    M3 J = M3::Zero();
    for (int i = 0; i < 3; ++i)
        for (const auto& t : fast_[i]) {
            const int e[3] = {t.e0, t.e1, t.e2};
            for (int j = 0; j < 3; ++j) {
                if (!e[j]) continue;
                cplx v = t.c * static_cast<double>(e[j]);
                for (int l = 0; l < 3; ++l)
                    v *= ipow(z(l), l == j ? e[l] - 1 : e[l]);
                J(i, j) += v;
            }
        }
    return J;
}

ProjectiveMap ProjectiveMap::parse(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty map file");
    ProjectiveMap f;
    {
        std::istringstream hs(line);
        std::string tag, kv;
        hs >> tag;
        if (tag != "pmap") throw ParseError("map file must start with 'pmap'");
        int got = 0;
        while (hs >> kv) {
            if (kv.rfind("k=", 0) == 0) {
                f.k = std::stoi(kv.substr(2));
                ++got;
            } else if (kv.rfind("d=", 0) == 0) {
                f.d = std::stoi(kv.substr(2));
                ++got;
            }
        }
        if (got != 2) throw ParseError("pmap header needs k=<int> d=<int>");
    }
    if (f.k < 2 || f.d < 2) throw ParseError("pmap requires k >= 2, d >= 2");
    f.components.resize(f.k + 1);
    int ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int ci;
        if (!(ls >> ci)) throw ParseError("bad monomial line " + std::to_string(ln));
        if (ci < 0 || ci > f.k)
            throw ParseError("component index out of range, line " +
                             std::to_string(ln));
        Monomial m;
        m.exps.resize(f.k + 1);
        int degsum = 0;
        for (int j = 0; j <= f.k; ++j) {
            if (!(ls >> m.exps[j]) || m.exps[j] < 0)
                throw ParseError("bad exponent, line " + std::to_string(ln));
            degsum += m.exps[j];
        }
        double re, im;
        if (!(ls >> re >> im))
            throw ParseError("missing coefficient, line " + std::to_string(ln));
        if (degsum != f.d)
            throw ParseError("inhomogeneous monomial (degree " +
                             std::to_string(degsum) + " != d), line " +
                             std::to_string(ln));
        m.coeff = cplx(re, im);
        f.components[ci].push_back(m);
    }
    for (int i = 0; i <= f.k; ++i)
        if (f.components[i].empty())
            throw ParseError("component " + std::to_string(i) + " has no terms");
    f.compile();
    return f;
}

ProjectiveMap ProjectiveMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open map file " + path);
    return parse(in);
}

void ProjectiveMap::write(std::ostream& out) const {
    out << "pmap k=" << k << " d=" << d << "\n";
    char buf[64];
    for (int i = 0; i <= k; ++i)
        for (const auto& m : components[i]) {
            out << i;
            for (int e : m.exps) out << ' ' << e;
            std::snprintf(buf, sizeof buf, " %.17g %.17g", m.coeff.real(),
                          m.coeff.imag());
            out << buf << "\n";
        }
}

std::uint64_t ProjectiveMap::content_hash() const {
    std::ostringstream ss;
    write(ss);
    return fnv1a(ss.str());
}

// ---- dynamics ---------------------------------------------------------------

HomogeneousPoint evaluate(const ProjectiveMap& f, const HomogeneousPoint& x) {
    if (x.k() != f.k) throw WrongDimension("point/map dimension mismatch");
    return normalize(HomogeneousPoint(f.eval(x.coords)));
}

HomogeneousPoint iterate(const ProjectiveMap& f, const HomogeneousPoint& x,
                         int n) {
    if (f.k == 2 && f.fast_ready())
        return HomogeneousPoint::from3(iterate3(f, x.v3(), n));
    HomogeneousPoint y = normalize(x);
    for (int i = 0; i < n; ++i) y = evaluate(f, y);
    return y;
}

V3 iterate3(const ProjectiveMap& f, V3 x, int n) {
    x = normalize3(x);
    for (int i = 0; i < n; ++i) x = normalize3(f.eval3(x));
    return x;
}

TangentPush tangent_pushforward(const ProjectiveMap& f, const V3& x0,
                                const V3& v0, int n) {
    V3 x = normalize3(x0);
    V3 v = v0 / v0.cwiseAbs().maxCoeff();
    double logstretch = 0.0;
    for (int i = 0; i < n; ++i) {
        const double before = fs_tangent_norm(x, v);
        const M3 J = f.jacobian3(x);
        V3 y = f.eval3(x);
        V3 w = J * v;
        const double after = fs_tangent_norm(y, w);
        if (before <= 0.0 || !(after >= 0.0))
            throw SolverFailure("tangent_pushforward: degenerate tangent");
        logstretch += std::log(after / before);
        x = normalize3(y);
        const double m = w.cwiseAbs().maxCoeff();
        v = m > 0 ? V3(w / m) : w;
    }
    return {x, v, logstretch};
}

JacobianData jacobian_data(const ProjectiveMap& f, const V3& x0) {
    JacobianData out;
    const V3 x = normalize3(x0);
    out.matrix = f.jacobian3(x);
    const V3 y = f.eval3(x);
    auto [e1, e2] = fs_frame(x); // FS-orthonormal at x
    const V3 u1 = out.matrix * e1;
    const V3 u2 = out.matrix * e2;
    // Gram of the images in the FS metric at y, frames normalized so that the
    // metric matrix at x is the identity (fs_herm doubled).
    Eigen::Matrix2cd G;
    G(0, 0) = 2.0 * fs_herm(y, u1, u1);
    G(0, 1) = 2.0 * fs_herm(y, u1, u2);
    G(1, 0) = 2.0 * fs_herm(y, u2, u1);
    G(1, 1) = 2.0 * fs_herm(y, u2, u2);
    out.projective_jacobian_modulus = std::abs(G.determinant().real());
    return out;
}

// ---- validation --------------------------------------------------------------

// forward declaration; implemented in algebraic.cpp (exact k=2 backend)
bool algebraic_map_nonvanishing(const ProjectiveMap& f, double* min_residual,
                                std::string* detail);

ValidationReport validate(const ProjectiveMap& f, int trials,
                          std::uint64_t seed) {
    ValidationReport rep;
    RngStream rng(seed, 0x7a11da7e);
    double worst = 1e300;
    CVec worst_z;
    for (int t = 0; t < trials; ++t) {
        CVec z(f.k + 1);
        for (int i = 0; i <= f.k; ++i) z(i) = rng.next_gaussian();
        double m = 0.0;
        for (int i = 0; i <= f.k; ++i) m = std::max(m, std::abs(z(i)));
        z /= m; // sup-norm 1
        const CVec w = f.eval(z);
        double r = 0.0;
        for (int i = 0; i <= f.k; ++i) r = std::max(r, std::abs(w(i)));
        if (r < worst) {
            worst = r;
            worst_z = z;
        }
    }
    rep.min_sphere_ratio = worst;
    if (worst < 1e-8) {
        rep.ok = false;
        rep.witness = HomogeneousPoint(worst_z);
        rep.detail = "near-common zero on the unit sphere";
        throw DegenerateMap(rep.detail);
    }
    if (f.k == 2) {
        double res = 0.0;
        std::string detail;
        if (!algebraic_map_nonvanishing(f, &res, &detail)) {
            rep.ok = false;
            rep.detail = detail;
            throw DegenerateMap(detail);
        }
        rep.detail = "resultant check passed, " + detail;
    } else {
        rep.detail = "Monte-Carlo check only (k > 2)";
    }
    rep.ok = true;
    return rep;
}

} // namespace pluridyn
