#include "pluridyn/projective.hpp"

#include <cmath>

#include "pluridyn/rng.hpp"

namespace pluridyn {

V3 HomogeneousPoint::v3() const {
    if (coords.size() != 3)
        throw WrongDimension("expected a point of P^2, got k=" +
                             std::to_string(k()));
    return V3(coords(0), coords(1), coords(2));
}

HomogeneousPoint HomogeneousPoint::from3(const V3& v) {
    HomogeneousPoint p;
    p.coords = v;
    return p;
}

HomogeneousPoint normalize(const HomogeneousPoint& x) {
    const auto n = x.coords.size();
    double best = 0.0;
    Eigen::Index arg = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = std::abs(x.coords(i));
        if (m > best) {
            best = m;
            arg = i;
        }
    }
    if (arg < 0 || best == 0.0) throw ZeroVector("normalize of the zero vector");
    HomogeneousPoint out;
    out.coords = x.coords / x.coords(arg);
    return out;
}

V3 normalize3(const V3& x) {
    double best = 0.0;
    int arg = -1;
    for (int i = 0; i < 3; ++i) {
        const double m = std::abs(x(i));
        if (m > best) {
            best = m;
            arg = i;
        }
    }
    if (arg < 0 || best == 0.0) throw ZeroVector("normalize of the zero vector");
    return x / x(arg);
}

double wedge_norm_sq(const V3& x, const V3& v) {
    // sum over i<j of |x_i v_j - x_j v_i|^2; direct minors are stabler than
    // |x|^2|v|^2 - |<x,v>|^2 when the vectors are nearly parallel.
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) s += std::norm(x(i) * v(j) - x(j) * v(i));
    return s;
}

static double wedge_norm_sq_dyn(const CVec& x, const CVec& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        for (Eigen::Index j = i + 1; j < x.size(); ++j)
            s += std::norm(x(i) * v(j) - x(j) * v(i));
    return s;
}

double fs_distance(const HomogeneousPoint& x, const HomogeneousPoint& y) {
    const double w = std::sqrt(wedge_norm_sq_dyn(x.coords, y.coords));
    const double d = std::abs(x.coords.dot(y.coords)); // conjugating dot
    return std::atan2(w, d);
}

double fs_distance3(const V3& x, const V3& y) {
    const double w = std::sqrt(wedge_norm_sq(x, y));
    const double d = std::abs(x.dot(y));
    return std::atan2(w, d);
}

double fs_tangent_norm(const V3& x, const V3& v) {
    return std::sqrt(wedge_norm_sq(x, v)) / x.squaredNorm();
}

cplx fs_herm(const V3& x, const V3& u, const V3& v) {
    const double nx2 = x.squaredNorm();
    const cplx uv = u.dot(v);   // conj(u).v
    const cplx ux = u.dot(x);   // conj(u).x
    const cplx xv = x.dot(v);   // conj(x).v
    return (uv * nx2 - ux * xv) / (2.0 * nx2 * nx2);
}

double FubiniStudyForm::area_density(const V3& x, const V3& v) {
    const double nx2 = x.squaredNorm();
    return wedge_norm_sq(x, v) / (M_PI * nx2 * nx2);
}

// ---- subspaces -------------------------------------------------------------

LinearSubspace LinearSubspace::from_points(const CMat& span_columns) {
    LinearSubspace s;
    Eigen::HouseholderQR<CMat> qr(span_columns);
    const Eigen::Index n = span_columns.rows();
    const Eigen::Index r = span_columns.cols();
    CMat q = qr.householderQ();
    s.basis = q.leftCols(r);
    s.kernel_forms = q.rightCols(n - r).adjoint();
    s.dimension = static_cast<int>(r) - 1;
    return s;
}

LinearSubspace LinearSubspace::from_kernel(const CMat& kernel_rows) {
    LinearSubspace s;
    const Eigen::Index n = kernel_rows.cols();
    const Eigen::Index m = kernel_rows.rows();
    Eigen::HouseholderQR<CMat> qr(kernel_rows.adjoint());
    CMat q = qr.householderQ();
    s.basis = q.rightCols(n - m);
    s.kernel_forms = kernel_rows;
    s.dimension = static_cast<int>(n - m) - 1;
    return s;
}

bool LinearSubspace::contains(const HomogeneousPoint& x, double eps) const {
    const CVec r = kernel_forms * x.coords;
    return r.norm() <= eps * x.coords.norm() * kernel_forms.norm();
}

LinearSubspace line_through(const V3& a, const V3& b) {
    CMat cols(3, 2);
    cols.col(0) = a;
    cols.col(1) = b;
    return LinearSubspace::from_points(cols);
}

LinearSubspace line_by_form(const V3& form) {
    CMat rows(1, 3);
    rows.row(0) = form.transpose();
    return LinearSubspace::from_kernel(rows);
}

LinearSubspace point_subspace(const V3& a) {
    CMat cols(3, 1);
    cols.col(0) = a;
    return LinearSubspace::from_points(cols);
}

// ---- center projection ------------------------------------------------------

CenterProjection CenterProjection::make(const LinearSubspace& I,
                                        const LinearSubspace& L) {
    const int n = I.k() + 1;
    const int pI = I.dimension + 1;
    const int pL = L.dimension + 1;
    if (pI + pL != n)
        throw WrongDimension("center and target dimensions must sum to k-1");
    CMat M(n, n);
    M.leftCols(pL) = L.basis;
    M.rightCols(pI) = I.basis;
    Eigen::FullPivLU<CMat> lu(M);
    if (!lu.isInvertible())
        throw WrongDimension("center and target subspaces intersect");
    CMat Minv = lu.inverse();
    CMat DL = CMat::Zero(n, n), DI = CMat::Zero(n, n);
    for (int i = 0; i < pL; ++i) DL(i, i) = 1.0;
    for (int i = 0; i < pI; ++i) DI(pL + i, pL + i) = 1.0;
    CenterProjection cp;
    cp.center = I;
    cp.target = L;
    cp.proj_L = M * DL * Minv;
    cp.proj_I = M * DI * Minv;
    return cp;
}

HomogeneousPoint CenterProjection::project(const HomogeneousPoint& x) const {
    CVec y = proj_L * x.coords;
    if (y.norm() <= 1e-14 * x.coords.norm())
        throw PointInCenter("project: point lies in the center I");
    return normalize(HomogeneousPoint(std::move(y)));
}

HomogeneousPoint CenterProjection::fiber_scale(cplx theta,
                                               const HomogeneousPoint& x) const {
    CVec base = proj_L * x.coords;
    if (base.norm() <= 1e-14 * x.coords.norm())
        throw PointInCenter("fiber_scale: point lies in the center I");
    CVec y = base + theta * (proj_I * x.coords);
    return normalize(HomogeneousPoint(std::move(y)));
}

double CenterProjection::fiber_radius_sq(const V3& x) const {
    const CVec xi = proj_I * x;
    const CVec xl = proj_L * x;
    return xi.squaredNorm() / xl.squaredNorm();
}

CenterProjection standard_center_projection() {
    LinearSubspace I = point_subspace(V3(0, 0, 1));
    LinearSubspace L = line_by_form(V3(0, 0, 1));
    return CenterProjection::make(I, L);
}

// ---- sampling ---------------------------------------------------------------

V3 random_fs_point(RngStream& rng) {
    V3 v;
    for (int i = 0; i < 3; ++i) v(i) = rng.next_gaussian();
    while (v.norm() < 1e-8)
        for (int i = 0; i < 3; ++i) v(i) = rng.next_gaussian();
    return normalize3(v);
}

V3 random_fs_tangent(const V3& x, RngStream& rng) {
    V3 g;
    for (int i = 0; i < 3; ++i) g(i) = rng.next_gaussian();
    V3 xe = x / x.norm();
    V3 t = g - xe * xe.dot(g);
    while (t.norm() < 1e-8) {
        for (int i = 0; i < 3; ++i) g(i) = rng.next_gaussian();
        t = g - xe * xe.dot(g);
    }
    return t / fs_tangent_norm(x, t);
}

std::pair<V3, V3> fs_frame(const V3& x) {
    V3 xe = x / x.norm();
    // project the two coordinate axes most transverse to x
    int skip = 0;
    double best = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double m = std::abs(xe(i));
        if (m > best) {
            best = m;
            skip = i;
        }
    }
    V3 e1 = V3::Zero(), e2 = V3::Zero();
    e1((skip + 1) % 3) = 1.0;
    e2((skip + 2) % 3) = 1.0;
    V3 u1 = e1 - xe * xe.dot(e1);
    u1 /= u1.norm();
    V3 u2 = e2 - xe * xe.dot(e2) - u1 * u1.dot(e2);
    u2 /= u2.norm();
    // scale to FS-unit at x
    u1 /= fs_tangent_norm(x, u1);
    u2 /= fs_tangent_norm(x, u2);
    return {u1, u2};
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

} // namespace pluridyn
