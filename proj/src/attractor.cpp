#include "pluridyn/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pluridyn/parallel.hpp"
#include "pluridyn/rng.hpp"

namespace pluridyn {

// ---- expression parser -------------------------------------------------------
// grammar: expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)*
//          factor := unary ('^' factor)? ; unary := '-' unary | primary
//          primary := number | ident | ident '(' expr (',' expr)* ')' | '('
//          expr ')'
// identifiers: a0 a1 a2 (moduli of the sup-normalized lift), fib (fiber
// radius |z2| / max(|z0|,|z1|)), functions min max abs sqrt

namespace {

struct ExprNode {
    enum Op {
        kConst,
        kVar,
        kAdd,
        kSub,
        kMul,
        kDiv,
        kPow,
        kNeg,
        kMin,
        kMax,
        kAbs,
        kSqrt
    } op;
    double value = 0.0;
    int var = 0; // 0..2 = a_i, 3 = fib
    std::vector<std::unique_ptr<ExprNode>> kids;

    double eval(const double a[4]) const {
        switch (op) {
        case kConst: return value;
        case kVar: return a[var];
        case kAdd: return kids[0]->eval(a) + kids[1]->eval(a);
        case kSub: return kids[0]->eval(a) - kids[1]->eval(a);
        case kMul: return kids[0]->eval(a) * kids[1]->eval(a);
        case kDiv: return kids[0]->eval(a) / kids[1]->eval(a);
        case kPow: return std::pow(kids[0]->eval(a), kids[1]->eval(a));
        case kNeg: return -kids[0]->eval(a);
        case kMin: return std::min(kids[0]->eval(a), kids[1]->eval(a));
        case kMax: return std::max(kids[0]->eval(a), kids[1]->eval(a));
        case kAbs: return std::abs(kids[0]->eval(a));
        case kSqrt: return std::sqrt(kids[0]->eval(a));
        }
        return 0.0;
    }
};

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}
    std::unique_ptr<ExprNode> parse() {
        auto e = expr();
        skip();
        if (pos_ != s_.size())
            throw ParseError("trailing input in expression: " + s_.substr(pos_));
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    std::unique_ptr<ExprNode> expr() {
        auto left = term();
        for (;;) {
            if (eat('+')) {
                auto n = std::make_unique<ExprNode>();
                n->op = ExprNode::kAdd;
                n->kids.push_back(std::move(left));
                n->kids.push_back(term());
                left = std::move(n);
            } else if (eat('-')) {
                auto n = std::make_unique<ExprNode>();
                n->op = ExprNode::kSub;
                n->kids.push_back(std::move(left));
                n->kids.push_back(term());
                left = std::move(n);
            } else {
                return left;
            }
        }
    }
    std::unique_ptr<ExprNode> term() {
        auto left = factor();
        for (;;) {
            if (eat('*')) {
                auto n = std::make_unique<ExprNode>();
                n->op = ExprNode::kMul;
                n->kids.push_back(std::move(left));
                n->kids.push_back(factor());
                left = std::move(n);
            } else if (eat('/')) {
                auto n = std::make_unique<ExprNode>();
                n->op = ExprNode::kDiv;
                n->kids.push_back(std::move(left));
                n->kids.push_back(factor());
                left = std::move(n);
            } else {
                return left;
            }
        }
    }
    std::unique_ptr<ExprNode> factor() {
        auto base = unary();
        if (eat('^')) {
            auto n = std::make_unique<ExprNode>();
            n->op = ExprNode::kPow;
            n->kids.push_back(std::move(base));
            n->kids.push_back(factor());
            return n;
        }
        return base;
    }
    std::unique_ptr<ExprNode> unary() {
        if (eat('-')) {
            auto n = std::make_unique<ExprNode>();
            n->op = ExprNode::kNeg;
            n->kids.push_back(unary());
            return n;
        }
        return primary();
    }
    std::unique_ptr<ExprNode> primary() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of expression");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            const double v = std::stod(s_.substr(pos_), &used);
            pos_ += used;
            auto n = std::make_unique<ExprNode>();
            n->op = ExprNode::kConst;
            n->value = v;
            return n;
        }
        if (c == '(') {
            ++pos_;
            auto e = expr();
            if (!eat(')')) throw ParseError("missing ')'");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                    s_[pos_] == '_'))
                ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            if (id == "a0" || id == "a1" || id == "a2" || id == "fib") {
                auto n = std::make_unique<ExprNode>();
                n->op = ExprNode::kVar;
                n->var = id == "fib" ? 3 : (id[1] - '0');
                return n;
            }
            if (!eat('(')) throw ParseError("unknown identifier: " + id);
            std::vector<std::unique_ptr<ExprNode>> args;
            args.push_back(expr());
            while (eat(',')) args.push_back(expr());
            if (!eat(')')) throw ParseError("missing ')' after " + id);
            auto n = std::make_unique<ExprNode>();
            if (id == "min")
                n->op = ExprNode::kMin;
            else if (id == "max")
                n->op = ExprNode::kMax;
            else if (id == "abs")
                n->op = ExprNode::kAbs;
            else if (id == "sqrt")
                n->op = ExprNode::kSqrt;
            else
                throw ParseError("unknown function: " + id);
            const std::size_t need = (n->op == ExprNode::kAbs ||
                                      n->op == ExprNode::kSqrt)
                                         ? 1
                                         : 2;
            if (args.size() != need)
                throw ParseError("wrong arity for " + id);
            n->kids = std::move(args);
            return n;
        }
        throw ParseError(std::string("unexpected character '") + c + "'");
    }
};

} // namespace

// ---- region library -------------------------------------------------------------

Eigen::Matrix<double, 6, 1> TrappingRegion::gradient(const V3& x,
                                                     double h) const {
    Eigen::Matrix<double, 6, 1> g;
    const V3 xn = normalize3(x);
    int slot = 0;
    for (int i = 0; i < 3; ++i) {
        for (int part = 0; part < 2; ++part) {
            V3 xp = xn, xm = xn;
            const cplx dz = part == 0 ? cplx(h, 0) : cplx(0, h);
            xp(i) += dz;
            xm(i) -= dz;
            g(slot++) = (u(xp) - u(xm)) / (2 * h);
        }
    }
    return g;
}

TrappingRegion TrappingRegion::fiber_cone(double t) {
    TrappingRegion r;
    std::ostringstream ss;
    ss << "region cone t=" << t;
    r.spec = ss.str();
    r.u = [t](const V3& x) {
        return std::abs(x(2)) - t * std::max(std::abs(x(0)), std::abs(x(1)));
    };
    r.projection = standard_center_projection();
    return r;
}

TrappingRegion TrappingRegion::counterexample() {
    TrappingRegion r;
    r.spec = "region counterexample";
    // P^2 \ U = { all coordinate moduli within a factor 2 }
    r.u = [](const V3& x) {
        const double m0 = std::abs(x(0)), m1 = std::abs(x(1)),
                     m2 = std::abs(x(2));
        const double lo = std::min({m0, m1, m2});
        const double hi = std::max({m0, m1, m2});
        return 2.0 * lo - hi;
    };
    r.projection = standard_center_projection();
    return r;
}

TrappingRegion TrappingRegion::complement_ball(const V3& center,
                                               double radius) {
    TrappingRegion r;
    std::ostringstream ss;
    const V3 c = normalize3(center);
    ss << "region complement_ball r=" << radius;
    r.spec = ss.str();
    r.u = [c, radius](const V3& x) { return radius - fs_distance3(x, c); };
    r.projection = standard_center_projection();
    return r;
}

TrappingRegion TrappingRegion::whole_space() {
    TrappingRegion r;
    r.spec = "region whole_space";
    r.u = [](const V3&) { return -1.0; };
    r.projection = standard_center_projection();
    return r;
}

TrappingRegion TrappingRegion::from_expression(const std::string& expr) {
    TrappingRegion r;
    r.spec = "region expr " + expr;
    auto ast = std::shared_ptr<ExprNode>(ExprParser(expr).parse().release());
    r.u = [ast](const V3& x) {
        const double a[4] = {std::abs(x(0)), std::abs(x(1)), std::abs(x(2)),
                             std::abs(x(2)) /
                                 std::max(std::abs(x(0)), std::abs(x(1)))};
        return ast->eval(a);
    };
    r.projection = standard_center_projection();
    return r;
}

TrappingRegion TrappingRegion::parse(const std::string& line) {
    std::istringstream ss(line);
    std::string tag, kind;
    ss >> tag >> kind;
    if (tag != "region") throw ParseError("region line must start with 'region'");
    if (kind == "cone") {
        std::string kv;
        double t = 0.2;
        while (ss >> kv)
            if (kv.rfind("t=", 0) == 0) t = std::stod(kv.substr(2));
        return fiber_cone(t);
    }
    if (kind == "counterexample") return counterexample();
    if (kind == "whole_space") return whole_space();
    if (kind == "complement_ball") {
        std::string kv;
        double rad = 0.1;
        while (ss >> kv)
            if (kv.rfind("r=", 0) == 0) rad = std::stod(kv.substr(2));
        return complement_ball(V3(1, 1, 1), rad);
    }
    if (kind == "expr") {
        std::string rest;
        std::getline(ss, rest);
        return from_expression(rest);
    }
    throw ParseError("unknown region kind: " + kind);
}

TrappingRegion TrappingRegion::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open region file " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        return parse(line);
    }
    throw ParseError("region file has no region line: " + path);
}

// ---- hypothesis checks -------------------------------------------------------------

namespace {

std::string point_str(const V3& x) {
    std::ostringstream ss;
    ss << "[" << x(0) << ", " << x(1) << ", " << x(2) << "]";
    return ss.str();
}

} // namespace

double check_trapping(const ProjectiveMap& f, TrappingRegion& U,
                      int boundary_samples, std::uint64_t seed) {
    RngStream rng(seed, 0x7a9);
    std::vector<V3> inside, outside;
    const int scan = std::max(boundary_samples * 8, 4000);
    for (int i = 0; i < scan; ++i) {
        const V3 x = random_fs_point(rng);
        (U.value(x) < 0 ? inside : outside).push_back(x);
        if (static_cast<int>(std::min(inside.size(), outside.size())) >
            boundary_samples)
            break;
    }
    if (inside.empty())
        throw TrappingViolated("the region U appears to be empty");
    if (outside.empty())
        throw TrappingViolated("the region U appears to be all of P^2");

    // interior images must stay inside
    for (const V3& x : inside) {
        const V3 y = iterate3(f, x, 1);
        if (U.value(y) >= 0.0)
            throw TrappingViolated("f(U) leaves U at x = " + point_str(x) +
                                   ", f(x) = " + point_str(y));
    }

    // bisect inside/outside pairs onto the u = 0 shell
    double margin = 1e300;
    const int pairs = std::min<std::size_t>(
        boundary_samples, std::min(inside.size(), outside.size()));
    for (int i = 0; i < pairs; ++i) {
        V3 a = inside[i], b = outside[i];
        for (int it = 0; it < 60; ++it) {
            const V3 mid = normalize3(a + b);
            if (U.value(mid) < 0)
                a = mid;
            else
                b = mid;
        }
        const V3 shell = normalize3(a + b);
        const V3 img = iterate3(f, shell, 1);
        const double m = -U.value(img);
        if (m <= 0.0)
            throw TrappingViolated("boundary image leaves U at x = " +
                                   point_str(shell));
        margin = std::min(margin, m);
    }
    U.validated_margin = margin;
    return margin;
}

StarShapeReport check_star_shaped(const TrappingRegion& U, int rays_per_fiber,
                                  int fibers, std::uint64_t seed) {
    StarShapeReport rep;
    RngStream rng(seed, 0x57a);
    const CenterProjection& cp = U.projection;
    // fiber direction: lift basis of the center I (p = 1: one column)
    const V3 dirI(cp.center.basis(0, 0), cp.center.basis(1, 0),
                  cp.center.basis(2, 0));
    const int t_steps = 240;
    for (int fi = 0; fi < fibers; ++fi) {
        // random base point on L
        CVec coeffs(cp.target.dimension + 1);
        for (Eigen::Index i = 0; i < coeffs.size(); ++i)
            coeffs(i) = rng.next_gaussian();
        CVec base_dyn = cp.target.basis * coeffs;
        V3 base(base_dyn(0), base_dyn(1), base_dyn(2));
        base = normalize3(base);
        if (U.value(base) >= 0.0) {
            rep.pass = false;
            ++rep.violations;
            if (rep.witnesses.size() < 8)
                rep.witnesses.push_back("L is not inside U at " +
                                        point_str(base));
            continue;
        }
        for (int ri = 0; ri < rays_per_fiber; ++ri) {
            ++rep.rays_checked;
            const cplx phase = rng.next_unit_complex();
            bool left = false;
            bool violated = false;
            double t_return = 0.0;
            for (int s = 1; s <= t_steps; ++s) {
                const double tau = static_cast<double>(s) / (t_steps + 1);
                const double t = std::tan(0.5 * M_PI * tau);
                const V3 x = base + t * phase * dirI;
                const double val = U.value(x);
                if (!left && val >= 0.0) left = true;
                if (left && val < 0.0) {
                    violated = true;
                    t_return = t;
                    break;
                }
            }
            if (violated) {
                rep.pass = false;
                ++rep.violations;
                if (rep.witnesses.size() < 8) {
                    std::ostringstream ss;
                    ss << "ray re-enters U at t = " << t_return << " from "
                       << point_str(base);
                    rep.witnesses.push_back(ss.str());
                }
            }
            if (!left) rep.center_in_closure = true; // never exited toward I
        }
    }
    if (rep.center_in_closure) rep.pass = false;
    return rep;
}

std::vector<V3> attracting_set(const ProjectiveMap& f, const TrappingRegion& U,
                               int n, int grid_size, std::uint64_t seed) {
    RngStream rng(seed, 0xa77);
    std::vector<V3> cloud;
    cloud.reserve(grid_size);
    int guard = 0;
    while (static_cast<int>(cloud.size()) < grid_size && guard++ < grid_size * 400) {
        const V3 x = random_fs_point(rng);
        if (U.value(x) < 0) cloud.push_back(x);
    }
    std::vector<V3> out(cloud.size());
    parallel_for(cloud.size(),
                 [&](std::size_t i) { out[i] = iterate3(f, cloud[i], n); });
    return out;
}

// ---- attracting current -----------------------------------------------------------

std::vector<double> ConvergenceDiagnostic::last_gaps() const {
    std::vector<double> gaps(form_labels.size(), 0.0);
    if (pairings.size() < 2) return gaps;
    const auto& a = pairings[pairings.size() - 2];
    const auto& b = pairings.back();
    for (std::size_t j = 0; j < gaps.size(); ++j) gaps[j] = std::abs(b[j] - a[j]);
    return gaps;
}

bool ConvergenceDiagnostic::converged() const {
    if (pairings.size() < 4) return false;
    for (std::size_t j = 0; j < form_labels.size(); ++j)
        for (std::size_t r = pairings.size() - 3; r < pairings.size(); ++r)
            if (std::abs(pairings[r][j] - pairings[r - 1][j]) > gap_tol)
                return false;
    return true;
}

std::vector<double> ConvergenceDiagnostic::limit_estimates() const {
    if (!converged())
        throw NonConvergence("limit estimates undefined before convergence");
    return pairings.back();
}

TauResult attracting_current(const ProjectiveMap& f, const TrappingRegion& U,
                             const LinearSubspace& Lprime, int n_max,
                             const std::vector<TestForm>& forms,
                             const RefinePolicy& policy, double gap_tol) {
    TauResult result;
    result.diag.gap_tol = gap_tol;
    for (const auto& fm : forms) result.diag.form_labels.push_back(fm.label());

    SampledCurrent base = line_current(Lprime, policy.rings * policy.base_phi);
    for (const auto& nd : base.nodes)
        if (U.value(nd.x) >= 0.0) {
            result.hypothesis_warning = true;
            break;
        }

    for (int n = 0; n <= n_max; ++n) {
        const SampledCurrent Sn =
            n == 0 ? base : pushforward(base, f, n, policy);
        std::vector<double> row;
        row.reserve(forms.size());
        for (const auto& fm : forms) row.push_back(pair_form(Sn, fm));
        result.diag.ns.push_back(n);
        result.diag.pairings.push_back(std::move(row));
        if (n == n_max) result.tau_n = Sn;
    }
    // divergence guard: the tail gap must not exceed the early gaps
    if (n_max >= 4) {
        for (std::size_t j = 0; j < forms.size(); ++j) {
            const auto& P = result.diag.pairings;
            const double early = std::abs(P[1][j] - P[0][j]) +
                                 std::abs(P[2][j] - P[1][j]) + 1e-12;
            const double late =
                std::abs(P[n_max][j] - P[n_max - 1][j]);
            if (late > 4.0 * early && late > gap_tol)
                throw NonConvergence("pairing gaps are growing for form " +
                                     result.diag.form_labels[j]);
        }
    }
    result.converged = result.diag.converged();
    return result;
}

LinearSubspace perturbed_line(const LinearSubspace& L, double radius,
                              std::uint64_t seed) {
    RngStream rng(seed, 0x11e);
    M3 G;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) G(i, j) = rng.next_gaussian();
    G /= G.norm();
    const M3 A = M3::Identity() + radius * G;
    CMat cols(3, 2);
    for (int c = 0; c < 2; ++c) {
        const V3 b(L.basis(0, c), L.basis(1, c), L.basis(2, c));
        cols.col(c) = A * b;
    }
    return LinearSubspace::from_points(cols);
}

// ---- counterexample -----------------------------------------------------------------

CounterexampleReport counterexample_run(int d, int n, int lines_per_cluster,
                                        const RefinePolicy& policy,
                                        std::uint64_t seed) {
    CounterexampleReport rep;
    const ProjectiveMap f = ProjectiveMap::power_map(2, d);
    TrappingRegion U = TrappingRegion::counterexample();
    check_trapping(f, U, 200, seed);
    rep.star_report = check_star_shaped(U, 12, 12, seed);

    // three localized bump forms, one per coordinate line {z_i = 0}
    std::vector<TestForm> forms;
    forms.push_back(TestForm::bump_omega(V3(0, 1, 1), 0.25, 0.6));
    forms.push_back(TestForm::bump_omega(V3(1, 0, 1), 0.25, 0.6));
    forms.push_back(TestForm::bump_omega(V3(1, 1, 0), 0.25, 0.6));

    RngStream rng(seed, 0xce);
    const double delta = 0.02;
    for (int axis = 0; axis < 3; ++axis) {
        for (int rep_i = 0; rep_i < lines_per_cluster; ++rep_i) {
            // a line with z_axis = delta * (g1 z_j + g2 z_k)
            const int j = (axis + 1) % 3, k2 = (axis + 2) % 3;
            V3 p1 = V3::Zero(), p2 = V3::Zero();
            p1(j) = 1.0;
            p1(axis) = delta * rng.next_gaussian();
            p2(k2) = 1.0;
            p2(axis) = delta * rng.next_gaussian();
            CMat cols(3, 2);
            cols.col(0) = p1;
            cols.col(1) = p2;
            const LinearSubspace Lp = LinearSubspace::from_points(cols);
            const TauResult t =
                attracting_current(f, U, Lp, n, forms, policy, 0.02);
            rep.pairings.push_back(t.diag.pairings.back());
            rep.cluster_of_line.push_back(axis);
        }
    }

    // within-cluster and between-cluster gaps in the pairing vectors
    auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s = std::max(s, std::abs(a[i] - b[i]));
        return s;
    };
    double within = 0.0;
    double between = 1e300;
    const int m = static_cast<int>(rep.pairings.size());
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const double dd = dist(rep.pairings[i], rep.pairings[j]);
            if (rep.cluster_of_line[i] == rep.cluster_of_line[j])
                within = std::max(within, dd);
            else
                between = std::min(between, dd);
        }
    rep.within_cluster_gap = within;
    rep.between_cluster_gap = between;
    rep.three_clusters = between > 10.0 * std::max(within, 1e-12);
    return rep;
}

// ---- potential comparison ------------------------------------------------------------

PotentialComparisonReport potential_comparison(
    const ProjectiveMap& f, const TrappingRegion& U, const ImplicitCurve& S_n,
    const ImplicitCurve& tau_n, int n, int grid_points, int u_points,
    std::uint64_t seed) {
    const HomogeneousPoint I = HomogeneousPoint::from3(
        V3(U.projection.center.basis(0, 0), U.projection.center.basis(1, 0),
           U.projection.center.basis(2, 0)));
    const QuasiPotential gS =
        canonical_potential_of_pushforward(S_n, n, f.d, I);
    const QuasiPotential gT =
        canonical_potential_of_pushforward(tau_n, n, f.d, I);

    PotentialComparisonReport rep;
    rep.value_S_at_I = gS.value3(I.v3());
    rep.value_tau_at_I = gT.value3(I.v3());

    RngStream rng(seed, 0x90d);
    int got = 0;
    double max_diff = -1e300;
    while (got < grid_points) {
        const V3 x = random_fs_point(rng);
        const double a = gS.value3(x), b = gT.value3(x);
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        max_diff = std::max(max_diff, a - b);
        ++got;
    }
    rep.max_gs_minus_gtau_global = max_diff;
    rep.grid_points = got;

    got = 0;
    double max_abs = 0.0;
    int guard = 0;
    while (got < u_points && guard++ < u_points * 500) {
        const V3 x = random_fs_point(rng);
        if (U.value(x) >= 0) continue;
        const double a = gS.value3(x), b = gT.value3(x);
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        max_abs = std::max(max_abs, std::abs(a - b));
        ++got;
    }
    rep.max_abs_diff_on_U = max_abs;
    rep.u_points = got;
    return rep;
}

// ---- jacobian contraction -------------------------------------------------------------

JacobianContractionReport jacobian_contraction(const ProjectiveMap& f,
                                               const TrappingRegion& U,
                                               int samples, std::uint64_t seed) {
    JacobianContractionReport rep;
    RngStream rng(seed, 0x1ac);
    const V3 dirI(U.projection.center.basis(0, 0),
                  U.projection.center.basis(1, 0),
                  U.projection.center.basis(2, 0));
    int got = 0;
    int guard = 0;
    while (got < samples && guard++ < samples * 500) {
        const V3 x = random_fs_point(rng);
        if (U.value(x) >= 0) continue;
        ++got;
        const JacobianData jd = jacobian_data(f, x);
        rep.max_jacobian = std::max(rep.max_jacobian,
                                    jd.projective_jacobian_modulus);
        // transverse (fiber-direction) first-order stretch
        const V3 y = f.eval3(normalize3(x));
        const V3 w = jd.matrix * dirI;
        const double before = fs_tangent_norm(normalize3(x), dirI);
        const double after = fs_tangent_norm(y, w);
        if (before > 0)
            rep.max_transverse_factor =
                std::max(rep.max_transverse_factor, after / before);
    }
    rep.uniqueness_flag = rep.max_jacobian < 1.0;
    return rep;
}

// ---- Lebesgue preimage statistic ---------------------------------------------------------

std::vector<PreimageStatRow> lebesgue_preimage_stat(const ProjectiveMap& f,
                                                    const TrappingRegion& U,
                                                    int n_max, int point_samples,
                                                    std::uint64_t seed) {
    RngStream rng(seed, 0x1eb);
    std::vector<PreimageStatRow> rows(n_max);
    for (int n = 1; n <= n_max; ++n) {
        rows[n - 1].n = n;
        rows[n - 1].mean_fraction = 0.0;
        rows[n - 1].total_count = 0;
        rows[n - 1].expected_total = 0;
        rows[n - 1].vacuous = true;
    }
    for (int s = 0; s < point_samples; ++s) {
        const V3 a = random_fs_point(rng);
        // walk the preimage tree level by level
        std::vector<PreimagePoint> level;
        PreimagePoint root;
        root.point = HomogeneousPoint::from3(a);
        root.multiplicity = 1;
        level.push_back(root);
        PreimageOptions opts;
        opts.seed = seed ^ (s * 0x9e3779b97f4a7c15ull);
        for (int n = 1; n <= n_max; ++n) {
            std::vector<PreimagePoint> next;
            for (const auto& node : level) {
                auto fiber = preimages(f, node.point, 1, opts);
                for (auto& q : fiber) {
                    q.multiplicity *= node.multiplicity;
                    next.push_back(std::move(q));
                }
            }
            level = std::move(next);
            long long in_u = 0, total = 0;
            for (const auto& q : level) {
                total += q.multiplicity;
                if (U.value(q.point.v3()) < 0) in_u += q.multiplicity;
            }
            auto& row = rows[n - 1];
            row.total_count += total;
            row.expected_total +=
                static_cast<long long>(std::llround(std::pow(f.d, 2 * n)));
            row.mean_fraction +=
                static_cast<double>(in_u) / std::pow(f.d, n) / point_samples;
            if (in_u != total) row.vacuous = false;
        }
    }
    return rows;
}

// ---- run registry -----------------------------------------------------------------------

RunRegistry& RunRegistry::instance() {
    static RunRegistry reg;
    return reg;
}

std::shared_ptr<const TauResult> RunRegistry::get_or_run(
    const std::string& key, const std::function<TauResult()>& compute) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto value = std::make_shared<const TauResult>(compute());
    cache_.emplace(key, value);
    return value;
}

} // namespace pluridyn
