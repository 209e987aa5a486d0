#include "fdg/basis.hpp"

#include <cmath>

namespace fdg {

namespace {

void check_domain(const Domain& d) {
    if (!(d.hi > d.lo)) throw InvalidArgument("domain requires hi > lo");
}

// Raw B-spline values N_j(t), j = 0..L-1, by the Cox-de Boor recursion on a
// clamped knot vector. The final span is treated as closed so t == hi is valid.
Eigen::VectorXd bspline_values(const std::vector<double>& knots, int degree, int L, double t) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(L);

    // Locate the knot span [knots[s], knots[s+1]) containing t.
    int lo = degree;
    int hi = L;  // last valid span index + 1
    if (t >= knots[static_cast<size_t>(L)]) {
        lo = L - 1;  // clamp into the final span
    } else {
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            if (t < knots[static_cast<size_t>(mid)])
                hi = mid;
            else
                lo = mid;
        }
    }
    const int span = lo;

    // Triangular recursion: vals[r] holds N_{span-deg+r..span} at level deg.
    std::vector<double> vals(static_cast<size_t>(degree) + 1, 0.0);
    vals[0] = 1.0;
    for (int d = 1; d <= degree; ++d) {
        double saved = 0.0;
        for (int r = 0; r < d; ++r) {
            int idx = span - d + 1 + r;
            double denom = knots[static_cast<size_t>(idx + d)] - knots[static_cast<size_t>(idx)];
            double alpha = denom > 0.0 ? (t - knots[static_cast<size_t>(idx)]) / denom : 0.0;
            double tmp = vals[static_cast<size_t>(r)];
            vals[static_cast<size_t>(r)] = saved + (1.0 - alpha) * tmp;
            saved = alpha * tmp;
        }
        vals[static_cast<size_t>(d)] = saved;
    }
    for (int r = 0; r <= degree; ++r) {
        int j = span - degree + r;
        if (j >= 0 && j < L) out(j) = vals[static_cast<size_t>(r)];
    }
    return out;
}

}  // namespace

GaussRule gauss_legendre(int n) {
    // Newton iteration on Legendre roots; standard Golub-Welsch-free recipe.
    GaussRule rule;
    rule.nodes.resize(static_cast<size_t>(n));
    rule.weights.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<size_t>(i)] = x;
        rule.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return rule;
}

Eigen::VectorXd BasisSystem::eval(double t) const {
    if (!domain_.contains(t)) throw DomainError("evaluation point outside basis domain");
    switch (kind_) {
        case BasisKind::Fourier:
            return eval_fourier(t);
        case BasisKind::OrthonormalBSpline:
            return eval_bspline(t);
        case BasisKind::DisjointCosine:
            return eval_disjoint_cosine(t);
    }
    throw InvalidArgument("unknown basis kind");
}

Eigen::VectorXd BasisSystem::eval_fourier(double t) const {
    const double len = domain_.length();
    const double u = (t - domain_.lo) / len;
    Eigen::VectorXd out(size_);
    out(0) = 1.0 / std::sqrt(len);
    const double amp = std::sqrt(2.0 / len);
    for (int i = 1; i < size_; ++i) {
        int freq = (i + 1) / 2;
        double arg = 2.0 * M_PI * freq * u;
        out(i) = amp * ((i % 2 == 1) ? std::cos(arg) : std::sin(arg));
    }
    return out;
}

Eigen::VectorXd BasisSystem::eval_bspline(double t) const {
    return ortho_coeffs_ * bspline_values(knots_, degree_, size_, t);
}

Eigen::VectorXd BasisSystem::eval_disjoint_cosine(double t) const {
    const int m = segments_;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    int k = static_cast<int>(std::floor(t * m));
    if (k >= m) k = m - 1;  // t == 1 falls in the last segment, value 0
    double center = (2.0 * k + 1.0) / (2.0 * m);
    out(k) = std::cos(2.0 * m * M_PI * (t - center)) + 1.0;
    return out;
}

bool BasisSystem::same_system(const BasisSystem& other) const {
    if (kind_ != other.kind_ || size_ != other.size_ || !(domain_ == other.domain_)) return false;
    if (kind_ == BasisKind::OrthonormalBSpline) {
        return degree_ == other.degree_ && knots_ == other.knots_;
    }
    if (kind_ == BasisKind::DisjointCosine) {
        return segments_ == other.segments_;
    }
    return true;
}

BasisPtr make_fourier_basis(int L, const Domain& domain) {
    check_domain(domain);
    if (L < 1) throw InvalidArgument("Fourier basis requires L >= 1");
    auto b = std::shared_ptr<BasisSystem>(new BasisSystem());
    b->kind_ = BasisKind::Fourier;
    b->size_ = L;
    b->domain_ = domain;
    return b;
}

BasisPtr make_orthonormal_bspline_basis(int L, int degree, const Domain& domain) {
    check_domain(domain);
    if (degree < 0) throw InvalidArgument("B-spline degree must be nonnegative");
    if (L < degree + 1)
        throw InvalidArgument("B-spline basis requires L >= degree + 1");

    auto b = std::shared_ptr<BasisSystem>(new BasisSystem());
    b->kind_ = BasisKind::OrthonormalBSpline;
    b->size_ = L;
    b->degree_ = degree;
    b->domain_ = domain;

    // Clamped uniform knots: degree+1 copies at each end, L-degree-1 interior.
    const int spans = L - degree;
    std::vector<double>& knots = b->knots_;
    knots.resize(static_cast<size_t>(L + degree + 1));
    for (int i = 0; i <= degree; ++i) {
        knots[static_cast<size_t>(i)] = domain.lo;
        knots[static_cast<size_t>(L + i)] = domain.hi;
    }
    for (int i = 1; i < spans; ++i)
        knots[static_cast<size_t>(degree + i)] =
            domain.lo + domain.length() * static_cast<double>(i) / spans;

    // Exact Gram matrix of the raw splines: per-span Gauss-Legendre with
    // degree+1 nodes integrates the degree-2d products exactly.
    GaussRule rule = gauss_legendre(degree + 1);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(L, L);
    for (int s = 0; s < spans; ++s) {
        double a = knots[static_cast<size_t>(degree + s)];
        double c = knots[static_cast<size_t>(degree + s + 1)];
        double half = 0.5 * (c - a);
        double mid = 0.5 * (c + a);
        for (size_t q = 0; q < rule.nodes.size(); ++q) {
            double t = mid + half * rule.nodes[q];
            Eigen::VectorXd v = bspline_values(knots, degree, L, t);
            gram.noalias() += (half * rule.weights[q]) * (v * v.transpose());
        }
    }

    // Gram-Schmidt in the Gram metric, run twice to restore orthogonality
    // lost to rounding. Rows of C express the orthonormal functions in the
    // raw spline system.
    Eigen::MatrixXd C = Eigen::MatrixXd::Identity(L, L);
    for (int i = 0; i < L; ++i) {
        Eigen::VectorXd v = C.row(i).transpose();
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < i; ++j) {
                Eigen::VectorXd cj = C.row(j).transpose();
                v -= (cj.dot(gram * v)) * cj;
            }
        }
        double nrm = std::sqrt(v.dot(gram * v));
        if (!(nrm > 0.0)) throw InvalidArgument("degenerate B-spline Gram matrix");
        C.row(i) = v.transpose() / nrm;
    }
    b->ortho_coeffs_ = C;
    return b;
}

BasisPtr make_disjoint_cosine_basis(int segments) {
    if (segments < 1) throw InvalidArgument("disjoint cosine basis requires m >= 1");
    auto b = std::shared_ptr<BasisSystem>(new BasisSystem());
    b->kind_ = BasisKind::DisjointCosine;
    b->size_ = segments;
    b->segments_ = segments;
    b->domain_ = Domain{0.0, 1.0};
    return b;
}

double inner_product(const FunctionRep& f, const FunctionRep& g) {
    if (!f.basis || !g.basis) throw InvalidArgument("function has no basis");
    if (!f.basis->same_system(*g.basis)) throw BasisMismatch("inner product across different bases");
    if (!f.basis->orthonormal())
        throw InvalidBasis("inner product requires an orthonormal basis");
    if (f.coeffs.size() != f.basis->size() || g.coeffs.size() != g.basis->size())
        throw InvalidArgument("coefficient length does not match basis size");
    return f.coeffs.dot(g.coeffs);
}

}  // namespace fdg
