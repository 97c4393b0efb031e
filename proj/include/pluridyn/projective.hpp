#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include "pluridyn/common.hpp"

namespace pluridyn {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using V3 = Eigen::Vector3cd;
using M3 = Eigen::Matrix3cd;

// ---- points ---------------------------------------------------------------

// Point of P^k in homogeneous coordinates. Normalized form has sup-norm 1:
// we divide by the first coordinate of maximal modulus, so that coordinate
// becomes exactly 1 and all others have modulus <= 1 (up to one ulp). The
// sup-norm convention makes the power-map Green function vanish identically,
// which the green module uses as an exact regression anchor.
struct HomogeneousPoint {
    CVec coords;

    HomogeneousPoint() = default;
    explicit HomogeneousPoint(CVec c) : coords(std::move(c)) {}
    HomogeneousPoint(cplx a, cplx b, cplx c) : coords(3) { coords << a, b, c; }

    int k() const { return static_cast<int>(coords.size()) - 1; }
    V3 v3() const;
    static HomogeneousPoint from3(const V3& v);
};

HomogeneousPoint normalize(const HomogeneousPoint& x);
V3 normalize3(const V3& x); // fast path, same convention

// Fubini-Study distance: the angle metric on P^k, range [0, pi/2].
// Computed through atan2 of the wedge and inner products, which stays
// accurate for nearly-equal and nearly-orthogonal pairs.
double fs_distance(const HomogeneousPoint& x, const HomogeneousPoint& y);
double fs_distance3(const V3& x, const V3& y);

inline bool proj_equal(const HomogeneousPoint& x, const HomogeneousPoint& y,
                       double eps = kEpsProj) {
    return fs_distance(x, y) <= eps;
}

// ---- metric helpers (lift-based, representative-invariant) ----------------

// squared norm of x wedge v  =  |x|^2 |v|^2 - |<x,v>|^2
double wedge_norm_sq(const V3& x, const V3& v);

// Complex Hessian at t=0 of t -> log|x + t v| ; this is the density basis for
// every (1,1)-form evaluator in the currents module:
//     omega restricted to the tangent line of direction v equals
//     (i/pi) * H * dt ^ dtbar  with H = fs_hessian(x, v).
// Invariant under v -> v + lambda*x and under rescaling of x (degree -2 in x,
// +2 in v), so callers must use consistent representatives; ratios of two
// Hessians at the same (x, v) are fully projective.
inline double fs_hessian(const V3& x, const V3& v) {
    const double nx2 = x.squaredNorm();
    return wedge_norm_sq(x, v) / (2.0 * nx2 * nx2);
}

// FS norm of a tangent representative (used for unit-normalizing tangents).
double fs_tangent_norm(const V3& x, const V3& v);

// Hermitian FS inner product of two tangent representatives at x
// (conjugate-linear in the first argument); fs_herm(x,v,v) = 2*fs_hessian.
cplx fs_herm(const V3& x, const V3& u, const V3& v);

// ---- linear subspaces ------------------------------------------------------

// Projective linear subspace of dimension `dimension`, cut by the rows of
// kernel_forms and spanned by the (Euclidean-orthonormal) columns of basis.
struct LinearSubspace {
    int dimension = 0;
    CMat kernel_forms; // (k - dimension) x (k+1), full rank
    CMat basis;        // (k+1) x (dimension+1), orthonormal columns

    int k() const { return static_cast<int>(basis.rows()) - 1; }

    // The subspace spanned by the given lift vectors (columns).
    static LinearSubspace from_points(const CMat& span_columns);
    // The subspace cut by the given covectors (rows).
    static LinearSubspace from_kernel(const CMat& kernel_rows);

    bool contains(const HomogeneousPoint& x, double eps = kEpsProj) const;
};

// Convenience for the k=2 engine.
LinearSubspace line_through(const V3& a, const V3& b);
LinearSubspace line_by_form(const V3& form);
LinearSubspace point_subspace(const V3& a);

// ---- center projection -----------------------------------------------------

// The canonical projection pi of center I onto L, together with the fiber
// scalings A_theta. With the lift splitting C^{k+1} = V_L (+) V_I the
// projection is x -> [P_L x] and A_theta = P_L + theta * P_I, which is a
// holomorphic family of matrices: A_1 = id, A_0 = pi, and
// A_{t1} A_{t2} = A_{t1 t2} on fibers.
struct CenterProjection {
    LinearSubspace center; // I, dimension p-1
    LinearSubspace target; // L, dimension k-p
    CMat proj_L;           // projector onto lift(L) along lift(I)
    CMat proj_I;           // projector onto lift(I) along lift(L)

    static CenterProjection make(const LinearSubspace& I,
                                 const LinearSubspace& L);

    int k() const { return static_cast<int>(proj_L.rows()) - 1; }

    CMat fiber_scale_matrix(cplx theta) const { return proj_L + theta * proj_I; }

    HomogeneousPoint project(const HomogeneousPoint& x) const;
    HomogeneousPoint fiber_scale(cplx theta, const HomogeneousPoint& x) const;

    // |P_I x|^2 / |P_L x|^2 : squared fiber radius, the building block of the
    // strictly dd^c-positive test forms and of the cone regions.
    double fiber_radius_sq(const V3& x) const;
};

// The standard (I, L) pair of the k=2 experiments: I = [0:0:1], L = {z2 = 0}.
CenterProjection standard_center_projection();

// ---- Fubini-Study form ------------------------------------------------------

// Normalization bookkeeping: a projective line has FS area exactly 1 and
// the total volume of P^k is 1. All quadrature weights in the currents module
// are calibrated against this convention.
struct FubiniStudyForm {
    double line_area = 1.0;
    // FS area density of a parametrized curve t -> x + t v against Lebesgue
    // dA(t), for representatives (x, v):  |x ^ v|^2 / (pi |x|^4).
    static double area_density(const V3& x, const V3& v);
};

// FS-uniform random point of P^2 (unitary invariant).
class RngStream;
V3 random_fs_point(RngStream& rng);
// Unit tangent representative at x orthogonal to x (Euclidean lift), FS-unit.
V3 random_fs_tangent(const V3& x, RngStream& rng);
// Deterministic FS-orthonormal tangent frame at x (k=2: two directions).
std::pair<V3, V3> fs_frame(const V3& x);

} // namespace pluridyn
