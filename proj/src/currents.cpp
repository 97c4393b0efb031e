#include "pluridyn/currents.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "pluridyn/parallel.hpp"
#include "pluridyn/rng.hpp"

namespace pluridyn {

// ---- scalar fields ----------------------------------------------------------

namespace {

class QuadraticRatioField final : public ScalarField {
public:
    explicit QuadraticRatioField(const M3& B) : B_(B) {
        Eigen::SelfAdjointEigenSolver<M3> es(B.adjoint() * B);
        sup_ = es.eigenvalues().maxCoeff();
    }
    double value(const V3& x) const override {
        return (B_ * x).squaredNorm() / x.squaredNorm();
    }
    cplx dir_deriv(const V3& x, const V3& v) const override {
        const V3 Bx = B_ * x, Bv = B_ * v;
        const double D = x.squaredNorm(), N = Bx.squaredNorm();
        const cplx nb = Bx.dot(Bv); // conj(Bx).Bv
        const cplx dxv = x.dot(v);
        return nb / D - N * dxv / (D * D);
    }
    double dir_hessian(const V3& x, const V3& v) const override {
        const V3 Bx = B_ * x, Bv = B_ * v;
        const double D = x.squaredNorm(), N = Bx.squaredNorm();
        const double Dv = v.squaredNorm(), Nv = Bv.squaredNorm();
        const cplx nb = Bx.dot(Bv);
        const cplx dxv = x.dot(v);
        return Nv / D - 2.0 * (nb * std::conj(dxv)).real() / (D * D) -
               N * Dv / (D * D) + 2.0 * N * std::norm(dxv) / (D * D * D);
    }
    double sup_norm() const override { return sup_; }

private:
    M3 B_;
    double sup_;
};

class ConstantField final : public ScalarField {
public:
    explicit ConstantField(double c) : c_(c) {}
    double value(const V3&) const override { return c_; }
    cplx dir_deriv(const V3&, const V3&) const override { return 0.0; }
    double dir_hessian(const V3&, const V3&) const override { return 0.0; }
    double sup_norm() const override { return std::abs(c_); }

private:
    double c_;
};

} // namespace

std::shared_ptr<ScalarField> quadratic_ratio_field(const M3& B) {
    return std::make_shared<QuadraticRatioField>(B);
}

std::shared_ptr<ScalarField> constant_field(double c) {
    return std::make_shared<ConstantField>(c);
}

std::shared_ptr<ScalarField> random_observable(std::uint64_t seed, int index) {
    RngStream rng(seed, 0x0b5 + index);
    M3 B;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            B(i, j) = (i == j ? cplx(1.0) : cplx(0.0)) + 0.6 * rng.next_gaussian();
    return quadratic_ratio_field(B);
}

// ---- test forms ---------------------------------------------------------------

TestForm TestForm::omega() {
    TestForm f;
    Atom a;
    a.kind = Atom::kPulled;
    f.atoms_.push_back(std::move(a));
    f.label_ = "omega";
    return f;
}

TestForm TestForm::pulled_omega(const M3& A) {
    TestForm f;
    Atom a;
    a.kind = Atom::kPulled;
    a.A = A;
    f.atoms_.push_back(std::move(a));
    f.label_ = "pulled_omega";
    return f;
}

TestForm TestForm::cutoff_omega(std::function<double(const V3&)> chi,
                                std::string label) {
    TestForm f;
    Atom a;
    a.kind = Atom::kCutoff;
    a.chi = std::move(chi);
    f.atoms_.push_back(std::move(a));
    f.label_ = std::move(label);
    return f;
}

namespace {
// C^inf transition: 1 for s <= 0, 0 for s >= 1
double smooth_step_down(double s) {
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return b / (a + b);
}
} // namespace

TestForm TestForm::bump_omega(const V3& center, double r_in, double r_out) {
    const V3 c = normalize3(center);
    auto chi = [c, r_in, r_out](const V3& x) {
        const double d = fs_distance3(x, c);
        return smooth_step_down((d - r_in) / (r_out - r_in));
    };
    TestForm f = cutoff_omega(chi, "bump");
    return f;
}

TestForm TestForm::strict_positive(const CenterProjection& cp,
                                   const std::vector<M3>& autos) {
    TestForm f;
    // capture the projectors by value
    const CMat PI = cp.proj_I, PL = cp.proj_L;
    auto psi = [PI, PL](const V3& x) {
        CVec xd(3);
        xd << x(0), x(1), x(2);
        const CVec xi = PI * xd, xl = PL * xd;
        return xi.squaredNorm() / xl.squaredNorm();
    };
    for (const auto& A : autos) {
        Atom a;
        a.kind = Atom::kCutoff;
        a.A = A;
        a.chi = psi;
        a.coeff = 1.0 / autos.size();
        f.atoms_.push_back(std::move(a));
    }
    f.label_ = "strict_psi";
    return f;
}

TestForm TestForm::ddc(const std::shared_ptr<ScalarField>& u) {
    TestForm f;
    Atom a;
    a.kind = Atom::kDdc;
    a.u = u;
    f.atoms_.push_back(std::move(a));
    f.label_ = "ddc_u";
    return f;
}

TestForm TestForm::d_of_vdcu(const std::shared_ptr<ScalarField>& v,
                             const std::shared_ptr<ScalarField>& u) {
    TestForm f;
    Atom a;
    a.kind = Atom::kMixed;
    a.u = u;
    a.v = v;
    f.atoms_.push_back(std::move(a));
    f.label_ = "d_vdcu";
    return f;
}

TestForm TestForm::operator+(const TestForm& o) const {
    TestForm f = *this;
    f.atoms_.insert(f.atoms_.end(), o.atoms_.begin(), o.atoms_.end());
    f.label_ = label_ + "+" + o.label_;
    return f;
}

TestForm TestForm::operator*(double k) const {
    TestForm f = *this;
    for (auto& a : f.atoms_) a.coeff *= k;
    return f;
}

double TestForm::hessian(const V3& x, const V3& v) const {
    double h = 0.0;
    for (const auto& a : atoms_) {
        switch (a.kind) {
        case Atom::kPulled: {
            const V3 Ax = a.A * x, Av = a.A * v;
            h += a.coeff * fs_hessian(Ax, Av);
            break;
        }
        case Atom::kCutoff: {
            const V3 Ax = a.A * x, Av = a.A * v;
            h += a.coeff * a.chi(Ax) * fs_hessian(Ax, Av);
            break;
        }
        case Atom::kDdc:
            h += a.coeff * a.u->dir_hessian(x, v);
            break;
        case Atom::kMixed: {
            const cplx vt = a.v->dir_deriv(x, v);
            const cplx ut = a.u->dir_deriv(x, v);
            h += a.coeff * ((vt * std::conj(ut)).real() +
                            a.v->value(x) * a.u->dir_hessian(x, v));
            break;
        }
        }
    }
    return h;
}

double TestForm::density(const V3& x, const V3& v) const {
    const double hw = fs_hessian(x, v);
    if (hw <= 0.0) return 0.0;
    return hessian(x, v) / hw;
}

// ---- quadrature layout ---------------------------------------------------------

namespace {

// Gauss-Legendre nodes/weights on (-1,1), Newton iteration
void legendre_rule(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

} // namespace

V3 LineSource::point(double phi, double u) const {
    // FS-uniform chart of the line: u = cos(theta) on the round sphere,
    // point = cos(theta/2) b0 + sin(theta/2) e^{i phi} b1
    const double th = std::acos(std::clamp(u, -1.0, 1.0));
    const double c = std::cos(0.5 * th), s = std::sin(0.5 * th);
    return c * b0 + s * cplx(std::cos(phi), std::sin(phi)) * b1;
}

double SampledCurrent::unnormalized_mass() const {
    return parallel_sum(nodes.size(),
                        [&](std::size_t i) { return nodes[i].w; });
}

void SampledCurrent::save_csv(std::ostream& out) const {
    char buf[256];
    out << "re0,im0,re1,im1,re2,im2,tre0,tim0,tre1,tim1,tre2,tim2,weight\n";
    for (const auto& n : nodes) {
        std::snprintf(
            buf, sizeof buf,
            "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
            "%.17g,%.17g\n",
            n.x(0).real(), n.x(0).imag(), n.x(1).real(), n.x(1).imag(),
            n.x(2).real(), n.x(2).imag(), n.t(0).real(), n.t(0).imag(),
            n.t(1).real(), n.t(1).imag(), n.t(2).real(), n.t(2).imag(), n.w);
        out << buf;
    }
}

namespace {

// tangent representative of the line span(b0,b1) at x, FS-unit
V3 line_tangent(const V3& b0, const V3& b1, const V3& x) {
    // whichever frame vector is less parallel to x
    const double c0 = std::abs(b0.dot(x));
    const double c1 = std::abs(b1.dot(x));
    V3 t = (c0 >= c1) ? b1 : b0;
    const double nrm = fs_tangent_norm(x, t);
    return t / nrm;
}

} // namespace

SampledCurrent line_current_frames(const V3& b0in, const V3& b1in,
                                   int node_target) {
    // orthonormalize the lift frame so the chart is an isometry onto the line
    V3 b0 = b0in / b0in.norm();
    V3 b1 = b1in - b0 * b0.dot(b1in);
    if (b1.norm() < 1e-12)
        throw WrongDimension("line frame is degenerate");
    b1 /= b1.norm();

    SampledCurrent S;
    S.source = LineSource{b0, b1, nullptr, 0};
    const int rings = std::max(12, static_cast<int>(std::sqrt(node_target / 2.0)));
    const int nphi = std::max(16, node_target / rings);
    std::vector<double> gx, gw;
    legendre_rule(rings, gx, gw);
    S.nodes.reserve(static_cast<std::size_t>(rings) * nphi);
    for (int j = 0; j < rings; ++j) {
        const double u = gx[j];
        for (int i = 0; i < nphi; ++i) {
            const double phi = 2.0 * M_PI * i / nphi;
            CurveNode n;
            n.ring = static_cast<float>(j);
            n.phi = phi;
            n.u = u;
            n.x = S.source->point(phi, u);
            n.t = line_tangent(b0, b1, n.x);
            n.w = gw[j] * (2.0 * M_PI / nphi) / (4.0 * M_PI);
            n.aux = 1.0;
            S.nodes.push_back(n);
        }
    }
    return S;
}

SampledCurrent line_current(const LinearSubspace& line, int node_target) {
    if (line.dimension != 1 || line.k() != 2)
        throw WrongDimension("line_current requires a line in P^2 (k-p = 1)");
    const V3 b0 = line.basis.col(0);
    const V3 b1 = line.basis.col(1);
    return line_current_frames(b0, b1, node_target);
}

// ---- pushforward ----------------------------------------------------------------

namespace {

struct PushedNode {
    V3 x, t;
    double stretch2;
    bool ok;
};

PushedNode push_node(const ProjectiveMap& f, const V3& x, const V3& t, int n) {
    PushedNode out;
    try {
        const TangentPush tp = tangent_pushforward(f, x, t, n);
        out.x = tp.image_point;
        const double nrm = fs_tangent_norm(tp.image_point, tp.image_tangent);
        out.t = (nrm > 0) ? V3(tp.image_tangent / nrm) : tp.image_tangent;
        out.stretch2 = std::exp(2.0 * tp.log_stretch);
        out.ok = nrm > 0 && std::isfinite(out.stretch2);
    } catch (const SolverFailure&) {
        out.x = x;
        out.t = t;
        out.stretch2 = 0.0;
        out.ok = false;
    }
    return out;
}

} // namespace

SampledCurrent pushforward(const SampledCurrent& S, const ProjectiveMap& f,
                           int steps, const RefinePolicy& policy) {
    SampledCurrent out;
    out.generation = S.generation + steps;
    out.mass_scale = S.mass_scale * std::pow(static_cast<double>(f.d), -steps);

    const bool can_refine =
        S.source && (S.source->map == &f || S.source->steps == 0) &&
        policy.max_gap > 0;

    if (!can_refine) {
        out.nodes.resize(S.nodes.size());
        parallel_for(S.nodes.size(), [&](std::size_t i) {
            const CurveNode& n = S.nodes[i];
            const PushedNode p = push_node(f, n.x, n.t, steps);
            CurveNode m = n;
            m.x = p.x;
            m.t = p.t;
            m.w = n.w * p.stretch2;
            out.nodes[i] = m;
        });
        return out;
    }

    const LineSource src{S.source->b0, S.source->b1, &f,
                         S.source->steps + steps};
    out.source = src;
    const int total_steps = src.steps;

    // collect ring structure of the base nodes
    std::vector<std::pair<double, std::vector<double>>> rings; // (u, phis)
    for (const auto& n : S.nodes) {
        const int r = static_cast<int>(n.ring);
        if (r >= static_cast<int>(rings.size())) rings.resize(r + 1);
        rings[r].first = n.u;
        rings[r].second.push_back(n.phi);
    }
    // Ring Gauss weights are recomputed from the rule (node weights of S may
    // already carry stretch factors from earlier pushforwards).
    std::vector<double> ring_w(rings.size(), 0.0);
    {
        std::vector<double> gx, gw;
        legendre_rule(static_cast<int>(rings.size()), gx, gw);
        for (std::size_t j = 0; j < rings.size(); ++j) {
            if (std::abs(gx[j] - rings[j].first) > 1e-9)
                throw RefinementBudgetExceeded(
                    "ring layout does not match the quadrature rule");
            ring_w[j] = gw[j] / 2.0;
        }
    }

    struct RingNodes {
        std::vector<double> phi;
        std::vector<PushedNode> img;
    };
    std::vector<RingNodes> ringed(rings.size());

    std::size_t total_nodes = 0;
    for (std::size_t j = 0; j < rings.size(); ++j) {
        auto& R = ringed[j];
        R.phi = rings[j].second;
        std::sort(R.phi.begin(), R.phi.end());
        const double u = rings[j].first;
        R.img.resize(R.phi.size());
        parallel_for(R.phi.size(), [&](std::size_t i) {
            const V3 x = src.point(R.phi[i], u);
            R.img[i] = push_node(f, x, line_tangent(src.b0, src.b1, x),
                                 total_steps);
        });
        // bisection passes until all gaps close
        for (;;) {
            std::vector<double> insert_phi;
            for (std::size_t i = 0; i < R.phi.size(); ++i) {
                const std::size_t nx = (i + 1) % R.phi.size();
                if (!R.img[i].ok || !R.img[nx].ok) continue;
                const double gap = fs_distance3(R.img[i].x, R.img[nx].x);
                if (gap > policy.max_gap) {
                    const double lo = R.phi[i];
                    double hi = R.phi[nx];
                    if (nx == 0) hi += 2.0 * M_PI;
                    insert_phi.push_back(0.5 * (lo + hi));
                }
            }
            if (insert_phi.empty()) break;
            if (total_nodes + R.phi.size() + insert_phi.size() >
                policy.node_budget)
                throw RefinementBudgetExceeded(
                    "pushforward refinement exceeded the node budget");
            std::vector<PushedNode> new_img(insert_phi.size());
            parallel_for(insert_phi.size(), [&](std::size_t i) {
                const double ph =
                    insert_phi[i] >= 2.0 * M_PI ? insert_phi[i] - 2.0 * M_PI
                                                : insert_phi[i];
                const V3 x = src.point(ph, u);
                new_img[i] =
                    push_node(f, x, line_tangent(src.b0, src.b1, x), total_steps);
            });
            for (std::size_t i = 0; i < insert_phi.size(); ++i) {
                const double ph =
                    insert_phi[i] >= 2.0 * M_PI ? insert_phi[i] - 2.0 * M_PI
                                                : insert_phi[i];
                const auto pos =
                    std::lower_bound(R.phi.begin(), R.phi.end(), ph);
                const auto off = pos - R.phi.begin();
                R.phi.insert(pos, ph);
                R.img.insert(R.img.begin() + off, new_img[i]);
            }
        }
        total_nodes += R.phi.size();
    }

    // assemble nodes with periodic trapezoid phi-shares
    out.nodes.reserve(total_nodes);
    for (std::size_t j = 0; j < rings.size(); ++j) {
        const auto& R = ringed[j];
        const std::size_t m = R.phi.size();
        if (m == 0) continue;
        const double wj = ring_w[j]; // total phi-integrated base weight / ring
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t prev = (i + m - 1) % m;
            const std::size_t next = (i + 1) % m;
            // phi_{i+1} - phi_{i-1} cyclically
            double span = R.phi[next] - R.phi[prev];
            if (span <= 0.0) span += 2.0 * M_PI;
            if (m == 1) span = 2.0 * M_PI;
            CurveNode n;
            n.ring = static_cast<float>(j);
            n.phi = R.phi[i];
            n.u = rings[j].first;
            n.x = R.img[i].x;
            n.t = R.img[i].t;
            n.w = wj * (0.5 * span / (2.0 * M_PI)) * R.img[i].stretch2;
            if (!R.img[i].ok) n.w = 0.0;
            n.aux = 1.0;
            out.nodes.push_back(n);
        }
    }
    return out;
}

// ---- pairings -------------------------------------------------------------------

double pair_form(const SampledCurrent& S, const TestForm& form) {
    const double ms = S.mass_scale;
    return parallel_sum(S.nodes.size(), [&](std::size_t i) {
        const CurveNode& n = S.nodes[i];
        if (n.w == 0.0) return 0.0;
        return n.w * ms * form.density(n.x, n.t);
    });
}

double pair_form_weighted(const SampledCurrent& S, const ScalarField& phi,
                          const TestForm& form) {
    const double ms = S.mass_scale;
    return parallel_sum(S.nodes.size(), [&](std::size_t i) {
        const CurveNode& n = S.nodes[i];
        if (n.w == 0.0) return 0.0;
        return n.w * ms * phi.value(n.x) * form.density(n.x, n.t);
    });
}

double pair_pushforward_pullback(const SampledCurrent& S,
                                 const ProjectiveMap& f, int n,
                                 const ScalarField* phi, const TestForm& form) {
    const double norm = std::pow(static_cast<double>(f.d), -n) * S.mass_scale;
    return parallel_sum(S.nodes.size(), [&](std::size_t i) {
        const CurveNode& nd = S.nodes[i];
        if (nd.w == 0.0) return 0.0;
        const PushedNode p = push_node(f, nd.x, nd.t, n);
        if (!p.ok) return 0.0;
        const double ph = phi ? phi->value(nd.x) : 1.0;
        return nd.w * norm * ph * p.stretch2 * form.density(p.x, p.t);
    });
}

// ---- structural discs -------------------------------------------------------------

bool StructuralDisc::theta_in_domain(cplx theta) const {
    const double re = std::clamp(theta.real(), 0.0, 1.0);
    return std::abs(theta - cplx(re, 0.0)) <= theta_radius + 1e-12;
}

M3 StructuralDisc::composite_matrix(cplx theta, const M3& A) const {
    M3 PL, PI;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            PL(i, j) = projection.proj_L(i, j);
            PI(i, j) = projection.proj_I(i, j);
        }
    const M3 lam = M3::Identity() + (cplx(1.0) - theta) * (A - M3::Identity());
    return lam * (PL + theta * PI);
}

namespace {

// fused disc pairing: avoids materializing the slice current
double disc_pairing(const StructuralDisc& D, cplx theta, const TestForm& form,
                    bool mass_only) {
    if (!D.theta_in_domain(theta))
        throw ThetaOutOfDomain("theta outside the disc domain V");
    double total = 0.0;
    for (const auto& [A, rho] : D.automorphism_samples) {
        const M3 C = D.composite_matrix(theta, A);
        const double ms = D.base.mass_scale;
        total += rho * parallel_sum(D.base.nodes.size(), [&](std::size_t i) {
            const CurveNode& n = D.base.nodes[i];
            if (n.w == 0.0) return 0.0;
            const V3 x = C * n.x;
            if (x.squaredNorm() < 1e-28 * n.x.squaredNorm()) return 0.0;
            const V3 t = C * n.t;
            const double h0 = fs_hessian(n.x, n.t);
            const double h1 = fs_hessian(x, t);
            const double stretch2 = h1 / h0;
            if (!std::isfinite(stretch2)) return 0.0;
            const double dens = mass_only ? 1.0 : form.density(x, t);
            return n.w * ms * stretch2 * dens;
        });
    }
    return total;
}

} // namespace

SampledCurrent StructuralDisc::evaluate(cplx theta) const {
    if (!theta_in_domain(theta))
        throw ThetaOutOfDomain("theta outside the disc domain V");
    SampledCurrent out;
    out.generation = base.generation;
    out.mass_scale = base.mass_scale;
    out.nodes.reserve(base.nodes.size() * automorphism_samples.size());
    for (const auto& [A, rho] : automorphism_samples) {
        const M3 C = composite_matrix(theta, A);
        for (const auto& n : base.nodes) {
            CurveNode m = n;
            const V3 x = C * n.x;
            if (x.squaredNorm() < 1e-28 * n.x.squaredNorm()) continue;
            const V3 t = C * n.t;
            const double h0 = fs_hessian(n.x, n.t);
            const double h1 = fs_hessian(x, t);
            const double stretch2 = h1 / h0;
            if (!std::isfinite(stretch2)) continue;
            m.x = normalize3(x);
            const double nrm = fs_tangent_norm(m.x, t);
            m.t = nrm > 0 ? V3(t / nrm) : t;
            m.w = n.w * rho * stretch2;
            out.nodes.push_back(m);
        }
    }
    return out;
}

StructuralDisc make_structural_disc(const SampledCurrent& base,
                                    const CenterProjection& cp, int n_autos,
                                    double radius, std::uint64_t seed) {
    StructuralDisc D;
    D.base = base;
    D.projection = cp;
    RngStream rng(seed, 0xd15c);
    D.automorphism_samples.emplace_back(M3::Identity(), 1.0 / n_autos);
    for (int i = 1; i < n_autos; ++i) {
        M3 G;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) G(r, c) = rng.next_gaussian();
        G /= G.norm();
        D.automorphism_samples.emplace_back(M3::Identity() + radius * G,
                                            1.0 / n_autos);
    }
    return D;
}

std::vector<double> slice_mass_scan(const StructuralDisc& D,
                                    const std::vector<cplx>& thetas) {
    std::vector<double> masses;
    masses.reserve(thetas.size());
    const TestForm om = TestForm::omega();
    for (const cplx th : thetas)
        masses.push_back(disc_pairing(D, th, om, true));
    return masses;
}

SubharmonicityReport subharmonicity_report(const StructuralDisc& D,
                                           const TestForm& form,
                                           const std::vector<cplx>& theta_grid,
                                           const std::vector<double>& radii,
                                           double tol, int circle_points) {
    SubharmonicityReport rep;
    for (const cplx th : theta_grid) {
        const double center = disc_pairing(D, th, form, false);
        for (const double r : radii) {
            bool inside = true;
            double mean = 0.0;
            for (int j = 0; j < circle_points && inside; ++j) {
                const double a = 2.0 * M_PI * j / circle_points;
                const cplx thr = th + r * cplx(std::cos(a), std::sin(a));
                if (!D.theta_in_domain(thr)) {
                    inside = false;
                    break;
                }
                mean += disc_pairing(D, thr, form, false);
            }
            if (!inside) continue;
            mean /= circle_points;
            SubharmonicitySample s;
            s.theta = th;
            s.radius = r;
            s.circle_mean_minus_center = mean - center;
            rep.worst_deficit = std::min(rep.worst_deficit,
                                         s.circle_mean_minus_center);
            if (s.circle_mean_minus_center < -tol) ++rep.flagged;
            rep.samples.push_back(s);
        }
    }
    return rep;
}

// ---- decay rates -------------------------------------------------------------------

double fit_log_slope(const std::vector<int>& ns, const std::vector<double>& ys) {
    if (ns.size() != ys.size() || ns.size() < 2)
        throw DegenerateFit("need at least two points for a slope");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(ns.size());
    for (int i = 0; i < m; ++i) {
        const double x = ns[i];
        const double y = std::log(std::abs(ys[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) throw DegenerateFit("degenerate abscissae");
    return (m * sxy - sx * sy) / denom;
}

DecayRates decay_rates(const SampledCurrent& S, const ProjectiveMap& f,
                       const std::shared_ptr<ScalarField>& phi,
                       const std::shared_ptr<ScalarField>& u,
                       const std::shared_ptr<ScalarField>& v, int n_min,
                       int n_max) {
    DecayRates out;
    out.n_min = n_min;
    const TestForm ddc_u = TestForm::ddc(u);
    const TestForm dv_dcu = TestForm::d_of_vdcu(v, u);
    std::vector<int> ns;
    for (int n = n_min; n <= n_max; ++n) {
        out.ddc_pairings.push_back(
            pair_pushforward_pullback(S, f, n, phi.get(), ddc_u));
        out.d_pairings.push_back(
            pair_pushforward_pullback(S, f, n, phi.get(), dv_dcu));
        ns.push_back(n);
    }
    double amax = 0.0, bmax = 0.0;
    for (double a : out.ddc_pairings) amax = std::max(amax, std::abs(a));
    for (double b : out.d_pairings) bmax = std::max(bmax, std::abs(b));
    if (amax < 1e-13 || bmax < 1e-13)
        throw DegenerateFit("pairings at the quadrature noise floor");
    out.ddc_slope = fit_log_slope(ns, out.ddc_pairings);
    out.d_slope = fit_log_slope(ns, out.d_pairings);
    return out;
}

} // namespace pluridyn
