#include "pluridyn/algebraic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <sstream>

#include "pluridyn/rng.hpp"

namespace pluridyn {

MpComplex mp_pow(MpComplex z, int e) {
    MpComplex r(1.0);
    while (e > 0) {
        if (e & 1) r *= z;
        z *= z;
        e >>= 1;
    }
    return r;
}

// ---- binary forms -----------------------------------------------------------

MpComplex BinForm::eval(const MpComplex& s, const MpComplex& t) const {
    const int D = degree();
    MpComplex acc(0.0);
    for (int j = 0; j <= D; ++j) acc += c[j] * mp_pow(s, D - j) * mp_pow(t, j);
    return acc;
}

BinForm bin_mul(const BinForm& a, const BinForm& b) {
    BinForm r;
    r.c.assign(a.c.size() + b.c.size() - 1, MpComplex());
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}

BinForm bin_add(const BinForm& a, const BinForm& b) {
    if (a.c.size() != b.c.size())
        throw PrecisionExhausted("binary form degree mismatch in add");
    BinForm r = a;
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
    return r;
}

BinForm bin_scale(const BinForm& a, const MpComplex& k) {
    BinForm r = a;
    for (auto& x : r.c) x *= k;
    return r;
}

// determinant with partial pivoting
static MpComplex mp_det(std::vector<std::vector<MpComplex>>& m) {
    const int n = static_cast<int>(m.size());
    MpComplex det(1.0);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        mpreal best = m[col][col].abs2();
        for (int r = col + 1; r < n; ++r) {
            const mpreal v = m[r][col].abs2();
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0) return MpComplex(0.0);
        if (piv != col) {
            std::swap(m[piv], m[col]);
            det = -det;
        }
        det *= m[col][col];
        for (int r = col + 1; r < n; ++r) {
            const MpComplex factor = m[r][col] / m[col][col];
            for (int cc = col; cc < n; ++cc) m[r][cc] -= factor * m[col][cc];
        }
    }
    return det;
}

MpComplex bin_resultant(const BinForm& a, const BinForm& b) {
    const int m = a.degree(), n = b.degree();
    const int size = m + n;
    if (size == 0) return MpComplex(1.0);
    std::vector<std::vector<MpComplex>> syl(
        size, std::vector<MpComplex>(size, MpComplex()));
    for (int r = 0; r < n; ++r)
        for (int j = 0; j <= m; ++j) syl[r][r + j] = a.c[j];
    for (int r = 0; r < m; ++r)
        for (int j = 0; j <= n; ++j) syl[n + r][r + j] = b.c[j];
    return mp_det(syl);
}

// Durand-Kerner on the dehomogenized polynomial, multiplicities by clustering.
std::vector<BinRoot> bin_roots(const BinForm& f, double cluster_tol) {
    const int D = f.degree();
    std::vector<BinRoot> out;
    // relative threshold for "zero" coefficients
    mpreal maxc(0);
    for (const auto& x : f.c) maxc = std::max(maxc, x.abs2());
    if (maxc == 0) throw PrecisionExhausted("bin_roots of the zero form");
    const mpreal zero_thresh = maxc * mpreal("1e-60");

    // roots at infinity [0:1]: trailing high-j zero coefficients
    int top = D;
    while (top >= 0 && f.c[top].abs2() <= zero_thresh) --top;
    const int inf_mult = D - top;
    if (top < 0) throw PrecisionExhausted("bin_roots: numerically zero form");
    if (inf_mult > 0) out.push_back({MpComplex(0.0), MpComplex(1.0), inf_mult});
    if (top == 0) return out;

    // Durand-Kerner for sum_{j<=top} c_j u^j
    const int n = top;
    std::vector<MpComplex> coef(f.c.begin(), f.c.begin() + top + 1);
    const MpComplex lead = coef[n];
    for (auto& x : coef) x = x / lead;
    // Cauchy bound for the start circle
    double radius = 0.0;
    for (int j = 0; j < n; ++j)
        radius = std::max(radius, static_cast<double>(coef[j].abs()));
    radius = 1.1 * (1.0 + radius);
    std::vector<MpComplex> z(n);
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * i / n + 0.7;
        z[i] = MpComplex(cplx(radius * std::cos(a), radius * std::sin(a)));
    }
    auto peval = [&](const MpComplex& u) {
        MpComplex acc = coef[n];
        for (int j = n - 1; j >= 0; --j) acc = acc * u + coef[j];
        return acc;
    };
    const mpreal tol = mpreal("1e-55");
    for (int sweep = 0; sweep < 400; ++sweep) {
        mpreal worst(0);
        for (int i = 0; i < n; ++i) {
            MpComplex denom(1.0);
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            const MpComplex delta = peval(z[i]) / denom;
            z[i] -= delta;
            worst = std::max(worst, delta.abs2());
        }
        if (worst < tol * tol) break;
    }
    // cluster
    std::vector<cplx> zd(n);
    for (int i = 0; i < n; ++i) zd[i] = z[i].to_cplx();
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
        if (used[i]) continue;
        used[i] = true;
        std::vector<int> members{i};
        for (int j = i + 1; j < n; ++j) {
            if (used[j]) continue;
            const double dd = std::abs(zd[i] - zd[j]) /
                              (1.0 + std::abs(zd[i]) + std::abs(zd[j]));
            if (dd <= cluster_tol) {
                used[j] = true;
                members.push_back(j);
            }
        }
        MpComplex mean(0.0);
        for (int idx : members) mean += z[idx];
        mean = mean / MpComplex(static_cast<double>(members.size()));
        out.push_back({MpComplex(1.0), mean, static_cast<int>(members.size())});
    }
    return out;
}

// ---- HomPoly2 ---------------------------------------------------------------

HomPoly2 HomPoly2::coordinate(int i) {
    HomPoly2 p = zero(1);
    if (i == 0)
        p.at(1, 0) = MpComplex(1.0);
    else if (i == 1)
        p.at(0, 1) = MpComplex(1.0);
    else
        p.at(0, 0) = MpComplex(1.0);
    return p;
}

HomPoly2 HomPoly2::from_map_component(const ProjectiveMap& f, int i) {
    if (f.k != 2) throw WrongDimension("algebraic backend requires k = 2");
    HomPoly2 p = zero(f.d);
    for (const auto& m : f.components[i])
        p.at(m.exps[0], m.exps[1]) += MpComplex(m.coeff);
    return p;
}

MpComplex HomPoly2::eval(const MpComplex& z0, const MpComplex& z1,
                         const MpComplex& z2) const {
    const int D = degree;
    std::vector<MpComplex> p0(D + 1), p1(D + 1), p2(D + 1);
    p0[0] = p1[0] = p2[0] = MpComplex(1.0);
    for (int j = 1; j <= D; ++j) {
        p0[j] = p0[j - 1] * z0;
        p1[j] = p1[j - 1] * z1;
        p2[j] = p2[j - 1] * z2;
    }
    MpComplex acc(0.0);
    for (int a = 0; a <= D; ++a)
        for (int b = 0; b <= D - a; ++b)
            acc += at(a, b) * p0[a] * p1[b] * p2[D - a - b];
    return acc;
}

cplx HomPoly2::eval_double(const V3& z) const {
    const int D = degree;
    std::vector<cplx> p0(D + 1), p1(D + 1), p2(D + 1);
    p0[0] = p1[0] = p2[0] = 1.0;
    for (int j = 1; j <= D; ++j) {
        p0[j] = p0[j - 1] * z(0);
        p1[j] = p1[j - 1] * z(1);
        p2[j] = p2[j - 1] * z(2);
    }
    cplx acc = 0.0;
    for (int a = 0; a <= D; ++a)
        for (int b = 0; b <= D - a; ++b)
            acc += at(a, b).to_cplx() * p0[a] * p1[b] * p2[D - a - b];
    return acc;
}

mpreal HomPoly2::max_abs() const {
    mpreal m(0);
    for (const auto& x : c) m = std::max(m, x.abs2());
    return sqrt(m);
}

BinForm HomPoly2::z2_coefficient(int j) const {
    // coefficient of z2^j: monomials with D-a-b = j, a binary form of degree D-j
    const int D = degree;
    BinForm bf;
    bf.c.assign(D - j + 1, MpComplex());
    for (int b = 0; b <= D - j; ++b) {
        const int a = D - j - b;
        bf.c[b] = at(a, b); // s^(D-j-b) t^b with s=z0, t=z1
    }
    return bf;
}

HomPoly2 hp_mul(const HomPoly2& a, const HomPoly2& b) {
    HomPoly2 r = HomPoly2::zero(a.degree + b.degree);
    for (int a0 = 0; a0 <= a.degree; ++a0)
        for (int b0 = 0; b0 <= a.degree - a0; ++b0) {
            const MpComplex& ca = a.at(a0, b0);
            if (ca.abs2() == 0) continue;
            for (int a1 = 0; a1 <= b.degree; ++a1)
                for (int b1 = 0; b1 <= b.degree - a1; ++b1)
                    r.at(a0 + a1, b0 + b1) += ca * b.at(a1, b1);
        }
    return r;
}

HomPoly2 hp_add(const HomPoly2& a, const HomPoly2& b) {
    if (a.degree != b.degree)
        throw PrecisionExhausted("degree mismatch in hp_add");
    HomPoly2 r = a;
    for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] += b.c[i];
    return r;
}

HomPoly2 hp_scale(const HomPoly2& a, const MpComplex& k) {
    HomPoly2 r = a;
    for (auto& x : r.c) x *= k;
    return r;
}

HomPoly2 hp_linear_substitute(const HomPoly2& p,
                              const std::array<std::array<MpComplex, 3>, 3>& T) {
    const int D = p.degree;
    // linear forms ell_i = T[i][0] z0 + T[i][1] z1 + T[i][2] z2 and their powers
    std::array<std::vector<HomPoly2>, 3> pow;
    for (int i = 0; i < 3; ++i) {
        HomPoly2 ell = HomPoly2::zero(1);
        ell.at(1, 0) = T[i][0];
        ell.at(0, 1) = T[i][1];
        ell.at(0, 0) = T[i][2];
        pow[i].push_back(HomPoly2::zero(0));
        pow[i][0].at(0, 0) = MpComplex(1.0);
        for (int j = 1; j <= D; ++j) pow[i].push_back(hp_mul(pow[i][j - 1], ell));
    }
    HomPoly2 r = HomPoly2::zero(D);
    for (int a = 0; a <= D; ++a)
        for (int b = 0; b <= D - a; ++b) {
            const MpComplex& co = p.at(a, b);
            if (co.abs2() == 0) continue;
            HomPoly2 term = hp_mul(pow[0][a], pow[1][b]);
            term = hp_mul(term, pow[2][D - a - b]);
            r = hp_add(r, hp_scale(term, co));
        }
    return r;
}

void HomPoly2::save(std::ostream& out) const {
    out << "poly k=2 d=" << degree << "\n";
    char buf[96];
    for (int a = 0; a <= degree; ++a)
        for (int b = 0; b <= degree - a; ++b) {
            const cplx v = at(a, b).to_cplx();
            if (v == cplx(0.0)) continue;
            std::snprintf(buf, sizeof buf, "0 %d %d %d %.17g %.17g", a, b,
                          degree - a - b, v.real(), v.imag());
            out << buf << "\n";
        }
}

HomPoly2 HomPoly2::parse(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty poly file");
    std::istringstream hs(line);
    std::string tag, kv;
    hs >> tag;
    if (tag != "poly") throw ParseError("poly file must start with 'poly'");
    int D = -1;
    while (hs >> kv)
        if (kv.rfind("d=", 0) == 0) D = std::stoi(kv.substr(2));
    if (D < 0) throw ParseError("poly header needs d=<int>");
    HomPoly2 p = zero(D);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int ci, a, b, cc;
        double re, im;
        if (!(ls >> ci >> a >> b >> cc >> re >> im))
            throw ParseError("bad poly line: " + line);
        if (a + b + cc != D) throw ParseError("inhomogeneous poly line: " + line);
        p.at(a, b) += MpComplex(cplx(re, im));
    }
    return p;
}

// ---- parametrized images ----------------------------------------------------

std::array<BinForm, 3> parametrize_image(const LinearSubspace& line,
                                         const ProjectiveMap& f, int n) {
    if (line.dimension != 1 || line.k() != 2)
        throw WrongDimension("parametrize_image expects a line in P^2");
    std::array<BinForm, 3> G;
    for (int i = 0; i < 3; ++i) {
        G[i].c.assign(2, MpComplex());
        G[i].c[0] = MpComplex(cplx(line.basis(i, 0)));
        G[i].c[1] = MpComplex(cplx(line.basis(i, 1)));
    }
    for (int step = 0; step < n; ++step) {
        const int D = G[0].degree();
        // power tables G_i^j, j <= d
        std::array<std::vector<BinForm>, 3> pow;
        for (int i = 0; i < 3; ++i) {
            BinForm one;
            one.c.assign(1, MpComplex(1.0));
            pow[i].push_back(one);
            for (int j = 1; j <= f.d; ++j)
                pow[i].push_back(bin_mul(pow[i][j - 1], G[i]));
        }
        std::array<BinForm, 3> next;
        for (int i = 0; i < 3; ++i) {
            next[i].c.assign(D * f.d + 1, MpComplex());
            for (const auto& m : f.components[i]) {
                BinForm term = pow[0][m.exps[0]];
                term = bin_mul(term, pow[1][m.exps[1]]);
                term = bin_mul(term, pow[2][m.exps[2]]);
                term = bin_scale(term, MpComplex(m.coeff));
                next[i] = bin_add(next[i], term);
            }
        }
        G = next;
    }
    return G;
}

// ---- implicitization --------------------------------------------------------

namespace {

// Gaussian elimination with full pivoting on an M x N matrix; returns the
// one-dimensional nullspace vector if rank == N-1, empty otherwise.
std::vector<MpComplex> nullspace_vector(
    std::vector<std::vector<MpComplex>>& A, int M, int N,
    const mpreal& rel_thresh) {
    std::vector<int> colperm(N);
    for (int j = 0; j < N; ++j) colperm[j] = j;
    mpreal maxentry(0);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < N; ++j) maxentry = std::max(maxentry, A[i][j].abs2());
    if (maxentry == 0) return {};
    const mpreal thresh = maxentry * rel_thresh * rel_thresh;
    int rank = 0;
    for (; rank < std::min(M, N); ++rank) {
        int pr = -1, pc = -1;
        mpreal best(0);
        for (int i = rank; i < M; ++i)
            for (int j = rank; j < N; ++j)
                if (A[i][j].abs2() > best) {
                    best = A[i][j].abs2();
                    pr = i;
                    pc = j;
                }
        if (pr < 0 || best <= thresh) break;
        std::swap(A[rank], A[pr]);
        if (pc != rank) {
            for (int i = 0; i < M; ++i) std::swap(A[i][rank], A[i][pc]);
            std::swap(colperm[rank], colperm[pc]);
        }
        for (int i = rank + 1; i < M; ++i) {
            const MpComplex fct = A[i][rank] / A[rank][rank];
            for (int j = rank; j < N; ++j) A[i][j] -= fct * A[rank][j];
        }
    }
    if (rank != N - 1) return {};
    // back-substitute with free variable = 1 in the last permuted column
    std::vector<MpComplex> x(N);
    x[N - 1] = MpComplex(1.0);
    for (int i = rank - 1; i >= 0; --i) {
        MpComplex s(0.0);
        for (int j = i + 1; j < N; ++j) s += A[i][j] * x[j];
        x[i] = (-s) / A[i][i];
    }
    std::vector<MpComplex> out(N);
    for (int j = 0; j < N; ++j) out[colperm[j]] = x[j];
    return out;
}

// exact sample points on the image curve, sup-normalized in AP
std::vector<std::array<MpComplex, 3>> curve_samples(
    const std::array<BinForm, 3>& G, int count) {
    std::vector<std::array<MpComplex, 3>> pts;
    pts.reserve(count);
    for (int r = 0; r < count; ++r) {
        const double ang = 2.0 * M_PI * r / count + 0.37;
        const double rad = 0.6 + 0.5 * ((r * 7) % 11) / 11.0;
        const MpComplex s(1.0);
        const MpComplex t(cplx(rad * std::cos(ang), rad * std::sin(ang)));
        std::array<MpComplex, 3> y{G[0].eval(s, t), G[1].eval(s, t),
                                   G[2].eval(s, t)};
        int arg = 0;
        mpreal best = y[0].abs2();
        for (int i = 1; i < 3; ++i)
            if (y[i].abs2() > best) {
                best = y[i].abs2();
                arg = i;
            }
        if (best == 0) continue; // base point, skip
        const MpComplex piv = y[arg];
        for (auto& v : y) v = v / piv;
        pts.push_back(y);
    }
    return pts;
}

// fit the minimal-degree curve through the samples among candidate degrees
bool fit_curve_degree(const std::vector<std::array<MpComplex, 3>>& pts, int D,
                      HomPoly2& out) {
    const int N = HomPoly2::dim(D);
    const int M = static_cast<int>(pts.size());
    if (M < N + 8) return false;
    std::vector<std::vector<MpComplex>> A(M, std::vector<MpComplex>(N));
    for (int r = 0; r < M; ++r) {
        std::vector<MpComplex> p0(D + 1), p1(D + 1), p2(D + 1);
        p0[0] = p1[0] = p2[0] = MpComplex(1.0);
        for (int j = 1; j <= D; ++j) {
            p0[j] = p0[j - 1] * pts[r][0];
            p1[j] = p1[j - 1] * pts[r][1];
            p2[j] = p2[j - 1] * pts[r][2];
        }
        for (int a = 0; a <= D; ++a)
            for (int b = 0; b <= D - a; ++b)
                A[r][HomPoly2::index(D, a, b)] = p0[a] * p1[b] * p2[D - a - b];
    }
    auto ns = nullspace_vector(A, M, N, mpreal("1e-30"));
    if (ns.empty()) return false;
    out.degree = D;
    out.c = std::move(ns);
    // normalize largest coefficient to 1
    int arg = 0;
    mpreal best(0);
    for (std::size_t i = 0; i < out.c.size(); ++i)
        if (out.c[i].abs2() > best) {
            best = out.c[i].abs2();
            arg = static_cast<int>(i);
        }
    const MpComplex piv = out.c[arg];
    for (auto& x : out.c) x = x / piv;
    return true;
}

} // namespace

ImplicitCurve implicitize_image(const LinearSubspace& line,
                                const ProjectiveMap& f, int n) {
    const auto G = parametrize_image(line, f, n);
    const int D = G[0].degree(); // = d^n

    // 1. minimal-degree fit through exact image points gives the square-free
    //    part; candidate degrees D' must divide D with D/D' the covering
    //    multiplicity.
    const int sample_count = std::max(2 * HomPoly2::dim(D) + 40, D * D + 24);
    const auto pts = curve_samples(G, sample_count);
    ImplicitCurve result;
    bool found = false;
    for (int Dp = 1; Dp <= D; ++Dp) {
        if (D % Dp != 0) continue;
        if (fit_curve_degree(pts, Dp, result.poly)) {
            result.multiplicity = D / Dp;
            found = true;
            break;
        }
    }
    if (!found)
        throw PrecisionExhausted(
            "implicitize_image: no curve degree fits the sampled image");

    // 2. resultant elimination cross-check:
    //    Res_[s:t](y2 G0 - y0 G2, y2 G1 - y1 G2) = const * y2^D * P(y)^mult.
    //    Verified at a fixed set of generic y values.
    {
        RngStream rng(401, 0xa1);
        MpComplex ratio0;
        bool have_ratio = false;
        for (int trial = 0; trial < 6; ++trial) {
            std::array<MpComplex, 3> y;
            for (auto& v : y)
                v = MpComplex(cplx(rng.next_signed(), rng.next_signed()));
            BinForm A = bin_add(bin_scale(G[0], y[2]), bin_scale(G[2], -y[0]));
            BinForm B = bin_add(bin_scale(G[1], y[2]), bin_scale(G[2], -y[1]));
            const MpComplex res = bin_resultant(A, B);
            const MpComplex expect =
                mp_pow(y[2], D) *
                mp_pow(result.poly.eval(y[0], y[1], y[2]), result.multiplicity);
            if (expect.abs2() == 0) continue;
            const MpComplex ratio = res / expect;
            if (!have_ratio) {
                ratio0 = ratio;
                have_ratio = true;
            } else {
                const mpreal err = (ratio - ratio0).abs() /
                                   (mpreal(1) + ratio0.abs());
                if (err > mpreal("1e-25"))
                    throw PrecisionExhausted(
                        "implicitize_image: resultant route disagrees with the "
                        "fitted curve");
            }
        }
    }
    return result;
}

// ---- curve intersection -----------------------------------------------------

namespace {

std::array<std::array<MpComplex, 3>, 3> random_frame(RngStream& rng) {
    // QR of a random complex matrix, computed in double then lifted
    M3 Grand;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) Grand(i, j) = rng.next_gaussian();
    Eigen::HouseholderQR<M3> qr(Grand);
    M3 Q = qr.householderQ();
    std::array<std::array<MpComplex, 3>, 3> T;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) T[i][j] = MpComplex(Q(i, j));
    return T;
}

} // namespace

std::vector<CurveIntersection> intersect_curves(const HomPoly2& P,
                                                const HomPoly2& Q,
                                                std::uint64_t seed) {
    const int dp = P.degree, dq = Q.degree;
    const int total = dp * dq;
    std::string last_err = "no attempt";
    for (int attempt = 0; attempt < 5; ++attempt) {
        RngStream rng(seed + attempt, 0x1c7);
        const auto T = random_frame(rng);
        const HomPoly2 Pt = hp_linear_substitute(P, T);
        const HomPoly2 Qt = hp_linear_substitute(Q, T);

        // leading z2 coefficients must not vanish in the generic frame
        if (Pt.z2_coefficient(dp).c[0].abs() <
                Pt.max_abs() * mpreal("1e-20") ||
            Qt.z2_coefficient(dq).c[0].abs() < Qt.max_abs() * mpreal("1e-20")) {
            last_err = "leading coefficient vanished";
            continue;
        }

        // resultant in z2 via DFT interpolation over (z0,z1) = (1, u_r);
        // nodes at working precision, or multiple roots of the resultant
        // lose half the digits per multiplicity order
        const int M = total + 1;
        const mpreal two_pi = 2 * boost::math::constants::pi<mpreal>();
        std::vector<MpComplex> vals(M);
        bool all_zero = true;
        for (int r = 0; r < M; ++r) {
            const mpreal ang = two_pi * r / M;
            const MpComplex u(cos(ang), sin(ang));
            BinForm pu, qu; // univariate in z2 at (1, u): store as BinForm in
                            // (s=1, t=z2) with coefficients c[j] of z2^j
            pu.c.resize(dp + 1);
            qu.c.resize(dq + 1);
            for (int j = 0; j <= dp; ++j)
                pu.c[j] = Pt.z2_coefficient(j).eval(MpComplex(1.0), u);
            for (int j = 0; j <= dq; ++j)
                qu.c[j] = Qt.z2_coefficient(j).eval(MpComplex(1.0), u);
            // Sylvester determinant at formal degrees (dp, dq); for binary
            // forms this equals the resultant up to a fixed sign.
            vals[r] = bin_resultant(pu, qu);
            if (vals[r].abs2() > 0) all_zero = false;
        }
        if (all_zero) throw CommonComponent("curves share a common component");

        // inverse DFT for the coefficients of R(1,u)
        std::vector<MpComplex> coefs(M);
        mpreal cmax(0);
        for (int j = 0; j < M; ++j) {
            MpComplex acc(0.0);
            for (int r = 0; r < M; ++r) {
                const MpComplex w(cplx(std::cos(-2.0 * M_PI * j * r / M),
                                       std::sin(-2.0 * M_PI * j * r / M)));
                acc += vals[r] * w;
            }
            coefs[j] = acc / MpComplex(static_cast<double>(M));
            cmax = std::max(cmax, coefs[j].abs2());
        }
        if (cmax == 0) throw CommonComponent("curves share a common component");
        if (sqrt(cmax) < mpreal("1e-45") * Pt.max_abs() * Qt.max_abs())
            throw CommonComponent("resultant numerically zero");

        BinForm R;
        R.c = coefs; // R(z0,z1) = sum coefs[j] z0^(total-j) z1^j
        std::vector<BinRoot> roots;
        try {
            roots = bin_roots(R, 1e-10);
        } catch (const PrecisionExhausted&) {
            last_err = "resultant root isolation failed";
            continue;
        }

        // lift each projection root to intersection points
        std::vector<CurveIntersection> out;
        int mult_sum = 0;
        bool ok = true;
        for (const auto& root : roots) {
            // chart: z0 = root.s, z1 = root.t
            std::vector<MpComplex> pu(dp + 1), qu(dq + 1);
            for (int j = 0; j <= dp; ++j)
                pu[j] = Pt.z2_coefficient(j).eval(root.s, root.t);
            for (int j = 0; j <= dq; ++j)
                qu[j] = Qt.z2_coefficient(j).eval(root.s, root.t);
            // roots of the z2-polynomial of P at this base point
            BinForm pb;
            pb.c = pu; // coefficients of z2^j in increasing j
            std::vector<BinRoot> zcands;
            try {
                zcands = bin_roots(pb, 1e-9);
            } catch (const PrecisionExhausted&) {
                ok = false;
                last_err = "fiber root isolation failed";
                break;
            }
            // candidates with small |Q|; [0:1] roots of pb mean z2 = infinity,
            // excluded by the generic frame
            const mpreal match_tol = Qt.max_abs() * mpreal("1e-12");
            std::vector<cplx> matched;
            MpComplex bestz;
            mpreal bestq(-1);
            for (const auto& zc : zcands) {
                if (zc.s.abs2() == 0) continue;
                const MpComplex z2 = zc.t / zc.s;
                MpComplex qv(0.0);
                for (int j = dq; j >= 0; --j) qv = qv * z2 + qu[j];
                const mpreal scale =
                    mp_pow(MpComplex(mpreal(1) + z2.abs()), dq).abs();
                const mpreal qa = qv.abs() / scale;
                if (bestq < 0 || qa < bestq) {
                    bestq = qa;
                    bestz = z2;
                }
                if (qa <= match_tol) matched.push_back(z2.to_cplx());
            }
            if (bestq < 0 || bestq > match_tol) {
                ok = false;
                last_err = "no fiber point matched the second curve";
                break;
            }
            // distinct matched z2 values mean two intersection points share a
            // projection line: the frame was not generic enough, retry
            bool ambiguous = false;
            for (const auto& m : matched)
                if (std::abs(m - bestz.to_cplx()) >
                    1e-8 * (1.0 + std::abs(m) + std::abs(bestz.to_cplx())))
                    ambiguous = true;
            if (ambiguous) {
                ok = false;
                last_err = "ambiguous projection";
                break;
            }
            // un-transform: actual point = T * (root.s, root.t, z2)
            std::array<MpComplex, 3> zp{root.s, root.t, bestz};
            V3 p;
            for (int i = 0; i < 3; ++i) {
                MpComplex acc(0.0);
                for (int j = 0; j < 3; ++j) acc += T[i][j] * zp[j];
                p(i) = acc.to_cplx();
            }
            CurveIntersection ci;
            ci.point = HomogeneousPoint::from3(normalize3(p));
            ci.multiplicity = root.multiplicity;
            mult_sum += root.multiplicity;
            out.push_back(std::move(ci));
        }
        if (!ok) continue;
        if (mult_sum != total) {
            last_err = "multiplicity sum " + std::to_string(mult_sum) +
                       " != " + std::to_string(total);
            continue;
        }
        return out;
    }
    throw PrecisionExhausted("intersect_curves failed: " + last_err);
}

HomPoly2 pullback_curve(const ProjectiveMap& f, const HomPoly2& H) {
    if (f.k != 2) throw WrongDimension("pullback_curve requires k = 2");
    const int D = H.degree;
    std::array<std::vector<HomPoly2>, 3> pow;
    for (int i = 0; i < 3; ++i) {
        HomPoly2 Fi = HomPoly2::from_map_component(f, i);
        pow[i].push_back(HomPoly2::zero(0));
        pow[i][0].at(0, 0) = MpComplex(1.0);
        for (int j = 1; j <= D; ++j) pow[i].push_back(hp_mul(pow[i][j - 1], Fi));
    }
    HomPoly2 r = HomPoly2::zero(D * f.d);
    for (int a = 0; a <= D; ++a)
        for (int b = 0; b <= D - a; ++b) {
            const MpComplex& co = H.at(a, b);
            if (co.abs2() == 0) continue;
            HomPoly2 term = hp_mul(pow[0][a], pow[1][b]);
            term = hp_mul(term, pow[2][D - a - b]);
            r = hp_add(r, hp_scale(term, co));
        }
    return r;
}

double curve_log_potential(const HomPoly2& P, const V3& x) {
    const V3 xn = normalize3(x); // sup-norm 1
    const cplx v = P.eval_double(xn);
    const double a = std::abs(v);
    if (a == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(a) / P.degree;
}

// exact nonvanishing check used by endomorphism::validate (k = 2): F0 and F1
// intersect in d^2 points (Bezout); the map is degenerate iff they share a
// component or F2 vanishes at one of the intersections.
bool algebraic_map_nonvanishing(const ProjectiveMap& f, double* min_residual,
                                std::string* detail) {
    const HomPoly2 F0 = HomPoly2::from_map_component(f, 0);
    const HomPoly2 F1 = HomPoly2::from_map_component(f, 1);
    const HomPoly2 F2 = HomPoly2::from_map_component(f, 2);
    std::vector<CurveIntersection> pts;
    try {
        pts = intersect_curves(F0, F1, 1009);
    } catch (const CommonComponent&) {
        if (detail) *detail = "first two components share a curve";
        return false;
    }
    double worst = 1e300;
    for (const auto& ci : pts) {
        const V3 p = ci.point.v3(); // sup-normalized
        MpComplex v = F2.eval(MpComplex(p(0)), MpComplex(p(1)), MpComplex(p(2)));
        worst = std::min(worst, static_cast<double>(v.abs()));
    }
    if (min_residual) *min_residual = worst;
    if (detail)
        *detail = "min |F2| over V(F0,F1) = " + std::to_string(worst);
    return worst > 1e-10;
}

} // namespace pluridyn
