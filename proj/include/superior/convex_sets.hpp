#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

namespace superior {

template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Parameter form of Point: Scalar is deduced from the other arguments, so Eigen
/// expressions convert implicitly.
template <typename Scalar>
using PointArg = std::type_identity_t<Point<Scalar>>;

template <typename Scalar>
using SparseNormal = Eigen::SparseVector<Scalar>;

/// Absolute tolerance on the constraint residual used for membership tests.
inline constexpr double kDefaultMembershipTolerance = 1e-12;

class DimensionMismatch : public std::invalid_argument {
public:
    DimensionMismatch(Eigen::Index expected, Eigen::Index actual)
        : std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                                ", got " + std::to_string(actual)) {}
};

namespace detail {

template <typename Scalar>
SparseNormal<Scalar> sparsify(const Point<Scalar>& dense) {
    SparseNormal<Scalar> s(dense.size());
    for (Eigen::Index j = 0; j < dense.size(); ++j)
        if (dense[j] != Scalar(0)) s.insertBack(j) = dense[j];
    return s;
}

template <typename Scalar>
Scalar checked_norm2(const SparseNormal<Scalar>& a) {
    Eigen::Index prev = -1;
    Scalar n2 = 0;
    for (typename SparseNormal<Scalar>::InnerIterator it(a); it; ++it) {
        if (it.index() <= prev)
            throw std::invalid_argument("sparse normal indices must be strictly increasing");
        if (!std::isfinite(it.value()))
            throw std::invalid_argument("sparse normal has a non-finite entry");
        prev = it.index();
        n2 += it.value() * it.value();
    }
    if (!(n2 > Scalar(0))) throw std::invalid_argument("normal vector must be nonzero");
    return n2;
}

template <typename Scalar>
Scalar sparse_dot(const SparseNormal<Scalar>& a, const PointArg<Scalar>& x) {
    Scalar s = 0;
    for (typename SparseNormal<Scalar>::InnerIterator it(a); it; ++it) s += it.value() * x[it.index()];
    return s;
}

template <typename Scalar>
void sparse_axpy(Scalar alpha, const SparseNormal<Scalar>& a, Point<Scalar>& x) {
    for (typename SparseNormal<Scalar>::InnerIterator it(a); it; ++it) x[it.index()] += alpha * it.value();
}

template <typename Derived>
void check_dim(Eigen::Index expected, const Eigen::EigenBase<Derived>& x) {
    if (x.size() != expected) throw DimensionMismatch(expected, x.size());
}

}  // namespace detail

/// {x : <a, x> = b}
template <typename Scalar>
class Hyperplane {
public:
    Hyperplane(SparseNormal<Scalar> normal, Scalar offset,
               Scalar tolerance = Scalar(kDefaultMembershipTolerance))
        : normal_(std::move(normal)), offset_(offset), tolerance_(tolerance) {
        norm2_ = detail::checked_norm2(normal_);
    }
    Hyperplane(const Point<Scalar>& dense_normal, Scalar offset,
               Scalar tolerance = Scalar(kDefaultMembershipTolerance))
        : Hyperplane(detail::sparsify(dense_normal), offset, tolerance) {}

    const SparseNormal<Scalar>& normal() const { return normal_; }
    Scalar offset() const { return offset_; }
    Scalar normal_squared_norm() const { return norm2_; }
    Scalar tolerance() const { return tolerance_; }
    Eigen::Index dim() const { return normal_.size(); }

    /// Signed residual <a, x> - b.
    Scalar residual(const PointArg<Scalar>& x) const { return detail::sparse_dot(normal_, x) - offset_; }

private:
    SparseNormal<Scalar> normal_;
    Scalar offset_;
    Scalar norm2_;
    Scalar tolerance_;
};

/// {x : <a, x> <= b}
template <typename Scalar>
class HalfSpace {
public:
    HalfSpace(SparseNormal<Scalar> normal, Scalar offset,
              Scalar tolerance = Scalar(kDefaultMembershipTolerance))
        : normal_(std::move(normal)), offset_(offset), tolerance_(tolerance) {
        norm2_ = detail::checked_norm2(normal_);
    }
    HalfSpace(const Point<Scalar>& dense_normal, Scalar offset,
              Scalar tolerance = Scalar(kDefaultMembershipTolerance))
        : HalfSpace(detail::sparsify(dense_normal), offset, tolerance) {}

    const SparseNormal<Scalar>& normal() const { return normal_; }
    Scalar offset() const { return offset_; }
    Scalar normal_squared_norm() const { return norm2_; }
    Scalar tolerance() const { return tolerance_; }
    Eigen::Index dim() const { return normal_.size(); }

    /// Positive part of <a, x> - b.
    Scalar violation(const PointArg<Scalar>& x) const {
        const Scalar r = detail::sparse_dot(normal_, x) - offset_;
        return r > Scalar(0) ? r : Scalar(0);
    }

private:
    SparseNormal<Scalar> normal_;
    Scalar offset_;
    Scalar norm2_;
    Scalar tolerance_;
};

/// {x : lower <= x <= upper} componentwise.
template <typename Scalar>
class Box {
public:
    Box(Point<Scalar> lower, Point<Scalar> upper, Scalar tolerance = Scalar(kDefaultMembershipTolerance))
        : lower_(std::move(lower)), upper_(std::move(upper)), tolerance_(tolerance) {
        if (lower_.size() != upper_.size()) throw DimensionMismatch(lower_.size(), upper_.size());
        if (lower_.size() < 1) throw std::invalid_argument("box must have dimension >= 1");
        if ((lower_.array() > upper_.array()).any())
            throw std::invalid_argument("box requires lower <= upper");
    }

    const Point<Scalar>& lower() const { return lower_; }
    const Point<Scalar>& upper() const { return upper_; }
    Scalar tolerance() const { return tolerance_; }
    Eigen::Index dim() const { return lower_.size(); }

private:
    Point<Scalar> lower_;
    Point<Scalar> upper_;
    Scalar tolerance_;
};

template <typename Scalar>
using ConvexSet = std::variant<Hyperplane<Scalar>, HalfSpace<Scalar>, Box<Scalar>>;

template <typename Scalar>
Eigen::Index ambient_dim(const ConvexSet<Scalar>& c) {
    return std::visit([](const auto& s) { return s.dim(); }, c);
}

/// Replaces x by its orthogonal projection onto c.
template <typename Scalar>
void project_in_place(Point<Scalar>& x, const ConvexSet<Scalar>& c) {
    std::visit(
        [&x](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            detail::check_dim(s.dim(), x);
            if constexpr (std::is_same_v<S, Hyperplane<Scalar>>) {
                detail::sparse_axpy(-s.residual(x) / s.normal_squared_norm(), s.normal(), x);
            } else if constexpr (std::is_same_v<S, HalfSpace<Scalar>>) {
                const Scalar v = s.violation(x);
                if (v > Scalar(0)) detail::sparse_axpy(-v / s.normal_squared_norm(), s.normal(), x);
            } else {
                x = x.cwiseMax(s.lower()).cwiseMin(s.upper());
            }
        },
        c);
}

template <typename Scalar>
Point<Scalar> project(const PointArg<Scalar>& x, const ConvexSet<Scalar>& c) {
    Point<Scalar> y = x;
    project_in_place(y, c);
    return y;
}

/// Adds scale * (P_c x - x) to accum without forming P_c x.
template <typename Scalar>
void accumulate_displacement(const PointArg<Scalar>& x, const ConvexSet<Scalar>& c, Scalar scale,
                             Point<Scalar>& accum) {
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            detail::check_dim(s.dim(), x);
            detail::check_dim(s.dim(), accum);
            if constexpr (std::is_same_v<S, Hyperplane<Scalar>>) {
                detail::sparse_axpy(-scale * s.residual(x) / s.normal_squared_norm(), s.normal(), accum);
            } else if constexpr (std::is_same_v<S, HalfSpace<Scalar>>) {
                const Scalar v = s.violation(x);
                if (v > Scalar(0)) detail::sparse_axpy(-scale * v / s.normal_squared_norm(), s.normal(), accum);
            } else {
                accum += scale * (x.cwiseMax(s.lower()).cwiseMin(s.upper()) - x);
            }
        },
        c);
}

/// For a hyperplane or half-space P_c x - x = alpha * normal; sets alpha to scale * that multiplier
/// and returns the normal. Returns nullptr for a box.
template <typename Scalar>
const SparseNormal<Scalar>* scaled_normal_step(const PointArg<Scalar>& x, const ConvexSet<Scalar>& c, Scalar scale,
                                               Scalar& alpha) {
    if (const auto* h = std::get_if<Hyperplane<Scalar>>(&c)) {
        detail::check_dim(h->dim(), x);
        alpha = -scale * h->residual(x) / h->normal_squared_norm();
        return &h->normal();
    }
    if (const auto* h = std::get_if<HalfSpace<Scalar>>(&c)) {
        detail::check_dim(h->dim(), x);
        const Scalar v = h->violation(x);
        alpha = v > Scalar(0) ? -scale * v / h->normal_squared_norm() : Scalar(0);
        return &h->normal();
    }
    return nullptr;
}

/// Euclidean distance from x to c, computed in closed form.
template <typename Scalar>
Scalar distance(const PointArg<Scalar>& x, const ConvexSet<Scalar>& c) {
    return std::visit(
        [&x](const auto& s) -> Scalar {
            using S = std::decay_t<decltype(s)>;
            detail::check_dim(s.dim(), x);
            if constexpr (std::is_same_v<S, Hyperplane<Scalar>>) {
                return std::abs(s.residual(x)) / std::sqrt(s.normal_squared_norm());
            } else if constexpr (std::is_same_v<S, HalfSpace<Scalar>>) {
                return s.violation(x) / std::sqrt(s.normal_squared_norm());
            } else {
                return (x - x.cwiseMax(s.lower()).cwiseMin(s.upper())).norm();
            }
        },
        c);
}

/// Membership up to the set's tolerance on the constraint residual.
template <typename Scalar>
bool contains(const ConvexSet<Scalar>& c, const PointArg<Scalar>& x) {
    return std::visit(
        [&x](const auto& s) -> bool {
            using S = std::decay_t<decltype(s)>;
            detail::check_dim(s.dim(), x);
            if constexpr (std::is_same_v<S, Hyperplane<Scalar>>) {
                return std::abs(s.residual(x)) <= s.tolerance();
            } else if constexpr (std::is_same_v<S, HalfSpace<Scalar>>) {
                return s.violation(x) <= s.tolerance();
            } else {
                return ((s.lower().array() - x.array()).maxCoeff() <= s.tolerance()) &&
                       ((x.array() - s.upper().array()).maxCoeff() <= s.tolerance());
            }
        },
        c);
}

}  // namespace superior
