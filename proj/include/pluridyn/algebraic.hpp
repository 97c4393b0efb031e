#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <vector>

#include "pluridyn/endomorphism.hpp"
#include "pluridyn/projective.hpp"

namespace pluridyn {

// 256-bit working precision for the exact k=2 backend. Map coefficients are
// generally non-rational, so arbitrary-precision floating point is used
// instead of exact rationals; residual checks detect precision exhaustion.
using mpreal =
    boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<77>,
                                  boost::multiprecision::et_off>;

struct MpComplex {
    mpreal re, im;
    MpComplex() : re(0), im(0) {}
    MpComplex(double r) : re(r), im(0) {}
    MpComplex(const mpreal& r) : re(r), im(0) {}
    MpComplex(mpreal r, mpreal i) : re(std::move(r)), im(std::move(i)) {}
    MpComplex(const cplx& z) : re(z.real()), im(z.imag()) {}

    MpComplex operator+(const MpComplex& o) const { return {re + o.re, im + o.im}; }
    MpComplex operator-(const MpComplex& o) const { return {re - o.re, im - o.im}; }
    MpComplex operator-() const { return {-re, -im}; }
    MpComplex operator*(const MpComplex& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    MpComplex operator/(const MpComplex& o) const {
        const mpreal d = o.re * o.re + o.im * o.im;
        return {(re * o.re + im * o.im) / d, (im * o.re - re * o.im) / d};
    }
    MpComplex& operator+=(const MpComplex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    MpComplex& operator-=(const MpComplex& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    MpComplex& operator*=(const MpComplex& o) { return *this = *this * o; }
    mpreal abs2() const { return re * re + im * im; }
    mpreal abs() const { return sqrt(abs2()); }
    MpComplex conj() const { return {re, -im}; }
    cplx to_cplx() const {
        return {static_cast<double>(re), static_cast<double>(im)};
    }
};

MpComplex mp_pow(MpComplex z, int e);

// dense binary form  sum_j c[j] s^(deg-j) t^j
struct BinForm {
    std::vector<MpComplex> c;
    int degree() const { return static_cast<int>(c.size()) - 1; }
    MpComplex eval(const MpComplex& s, const MpComplex& t) const;
};
BinForm bin_mul(const BinForm& a, const BinForm& b);
BinForm bin_add(const BinForm& a, const BinForm& b);
BinForm bin_scale(const BinForm& a, const MpComplex& k);

// Resultant of two binary forms (Sylvester determinant).
MpComplex bin_resultant(const BinForm& a, const BinForm& b);

// Roots of a binary form as projective points [s:t] with multiplicity,
// via Durand-Kerner iteration at working precision, then clustering.
struct BinRoot {
    MpComplex s, t;
    int multiplicity;
};
std::vector<BinRoot> bin_roots(const BinForm& f, double cluster_tol = 1e-10);

// ---- homogeneous trivariate polynomials (k = 2) ----------------------------

// Dense homogeneous polynomial of degree D on monomials z0^a z1^b z2^(D-a-b).
struct HomPoly2 {
    int degree = 0;
    std::vector<MpComplex> c; // size (D+1)(D+2)/2

    static int index(int D, int a, int b) {
        return a * (2 * D + 3 - a) / 2 + b;
    }
    static int dim(int D) { return (D + 1) * (D + 2) / 2; }

    static HomPoly2 zero(int D) {
        HomPoly2 p;
        p.degree = D;
        p.c.assign(dim(D), MpComplex());
        return p;
    }
    static HomPoly2 coordinate(int i); // z_i as a degree-1 polynomial
    static HomPoly2 from_map_component(const ProjectiveMap& f, int i);

    MpComplex& at(int a, int b) { return c[index(degree, a, b)]; }
    const MpComplex& at(int a, int b) const { return c[index(degree, a, b)]; }

    MpComplex eval(const MpComplex& z0, const MpComplex& z1,
                   const MpComplex& z2) const;
    cplx eval_double(const V3& z) const;
    mpreal max_abs() const;

    // coefficient of z2^j as a binary form in (z0, z1)
    BinForm z2_coefficient(int j) const;

    void save(std::ostream& out) const;
    static HomPoly2 parse(std::istream& in);
};

HomPoly2 hp_mul(const HomPoly2& a, const HomPoly2& b);
HomPoly2 hp_add(const HomPoly2& a, const HomPoly2& b);
HomPoly2 hp_scale(const HomPoly2& a, const MpComplex& k);
// substitute z_i <- linear_i(z), linear forms as rows of a 3x3 matrix
HomPoly2 hp_linear_substitute(const HomPoly2& p,
                              const std::array<std::array<MpComplex, 3>, 3>& T);

// ---- the three backend operations ------------------------------------------

struct ImplicitCurve {
    HomPoly2 poly;    // square-free defining polynomial of f^n(L')
    int multiplicity; // (f^n)_*[L'] = multiplicity * [poly = 0]
};

// Defining polynomial of f^n(L'), computed by eliminating the line parameter
// through resultants of the parametrized components; the square-free part and
// covering multiplicity are recovered by a minimal-degree fit through exact
// points of the image, and the two routes are cross-checked against each
// other. multiplicity * degree = d^n exactly.
ImplicitCurve implicitize_image(const LinearSubspace& line,
                                const ProjectiveMap& f, int n);

struct CurveIntersection {
    HomogeneousPoint point;
    int multiplicity;
};

// Bezout-complete intersection of two plane curves: resultant in a generic
// coordinate frame, root isolation, fiber lifting. Sum of multiplicities is
// exactly deg P * deg Q; throws CommonComponent when the curves share one.
std::vector<CurveIntersection> intersect_curves(const HomPoly2& P,
                                                const HomPoly2& Q,
                                                std::uint64_t seed = 11);

// H . F, degree deg(H)*d.
HomPoly2 pullback_curve(const ProjectiveMap& f, const HomPoly2& H);

// (1/D) log(|P(x~)| / |x~|_inf^D): the un-normalized curve potential in the
// sup-norm convention. -inf on the curve.
double curve_log_potential(const HomPoly2& P, const V3& x);

// parametrized components of f^n restricted to a line, as binary forms
std::array<BinForm, 3> parametrize_image(const LinearSubspace& line,
                                         const ProjectiveMap& f, int n);

} // namespace pluridyn
