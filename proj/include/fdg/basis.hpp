#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "fdg/errors.hpp"

namespace fdg {

// Closed interval the random functions live on.
struct Domain {
    double lo = 0.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
    bool contains(double t) const { return t >= lo && t <= hi; }
    bool operator==(const Domain& other) const = default;
};

enum class BasisKind { Fourier, OrthonormalBSpline, DisjointCosine };

// A finite system of basis functions on a domain. Fourier and orthonormal
// B-spline systems satisfy <b_i, b_j> = delta_ij, which is what lets every
// downstream integral reduce to coefficient-space linear algebra. The
// disjoint-cosine system is a data generator device and is not orthonormal.
class BasisSystem {
public:
    BasisKind kind() const { return kind_; }
    int size() const { return size_; }
    const Domain& domain() const { return domain_; }
    bool orthonormal() const { return kind_ != BasisKind::DisjointCosine; }

    // Spline-specific accessors (undefined for other kinds).
    int spline_degree() const { return degree_; }
    const std::vector<double>& knots() const { return knots_; }

    // Segment count for the disjoint-cosine system.
    int segments() const { return segments_; }

    // Values (b_1(t), ..., b_L(t)). Throws DomainError for t outside the domain.
    Eigen::VectorXd eval(double t) const;

    bool same_system(const BasisSystem& other) const;

    friend std::shared_ptr<const BasisSystem> make_fourier_basis(int L, const Domain& domain);
    friend std::shared_ptr<const BasisSystem> make_orthonormal_bspline_basis(int L, int degree,
                                                                             const Domain& domain);
    friend std::shared_ptr<const BasisSystem> make_disjoint_cosine_basis(int segments);

private:
    BasisSystem() = default;

    Eigen::VectorXd eval_fourier(double t) const;
    Eigen::VectorXd eval_bspline(double t) const;
    Eigen::VectorXd eval_disjoint_cosine(double t) const;

    BasisKind kind_ = BasisKind::Fourier;
    int size_ = 0;
    Domain domain_;

    // B-spline data: clamped knot vector and the orthonormalizing coefficient
    // matrix C, so that phi_i(t) = sum_j C(i,j) N_j(t).
    int degree_ = 0;
    std::vector<double> knots_;
    Eigen::MatrixXd ortho_coeffs_;

    int segments_ = 0;
};

using BasisPtr = std::shared_ptr<const BasisSystem>;

// Constant function plus cosine/sine pairs of increasing frequency, rescaled
// to be orthonormal on the domain. Ordering: 1, cos(2*pi*u), sin(2*pi*u),
// cos(4*pi*u), ... with u the affine map of t onto [0,1].
BasisPtr make_fourier_basis(int L, const Domain& domain);

// L B-splines of the given degree on a clamped uniform knot sequence,
// Gram-Schmidt orthonormalized against exact piecewise-polynomial inner
// products. Requires L >= degree + 1.
BasisPtr make_orthonormal_bspline_basis(int L, int degree, const Domain& domain);

// The m bump functions cos(2*m*pi*(t - (2k-1)/(2m))) + 1 with disjoint
// supports [(k-1)/m, k/m) on [0,1]. Not orthonormal; intended only for
// synthetic data generation.
BasisPtr make_disjoint_cosine_basis(int segments);

// A curve as a coefficient vector over a basis.
struct FunctionRep {
    BasisPtr basis;
    Eigen::VectorXd coeffs;

    double eval(double t) const { return basis->eval(t).dot(coeffs); }
};

// L2 inner product of two curves sharing one orthonormal basis; equals the
// coefficient dot product exactly.
double inner_product(const FunctionRep& f, const FunctionRep& g);

// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

}  // namespace fdg
