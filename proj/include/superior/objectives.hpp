#pragma once

#include "superior/convex_sets.hpp"

#include <cmath>
#include <stdexcept>

namespace superior {

/// A convex function with a subgradient oracle.
template <typename Scalar>
class ConvexObjective {
public:
    virtual ~ConvexObjective() = default;
    virtual Scalar value(const Point<Scalar>& x) const = 0;
    /// One member of the subdifferential at x.
    virtual Point<Scalar> subgradient(const Point<Scalar>& x) const = 0;
};

template <typename Scalar>
class ZeroObjective final : public ConvexObjective<Scalar> {
public:
    Scalar value(const Point<Scalar>&) const override { return Scalar(0); }
    Point<Scalar> subgradient(const Point<Scalar>& x) const override { return Point<Scalar>::Zero(x.size()); }
};

/// ||x||^2
template <typename Scalar>
class SquaredNorm final : public ConvexObjective<Scalar> {
public:
    Scalar value(const Point<Scalar>& x) const override { return x.squaredNorm(); }
    Point<Scalar> subgradient(const Point<Scalar>& x) const override { return Scalar(2) * x; }
};

/// W x H pixel image stored row-major; row 0 is the top row.
template <typename Scalar>
struct GridImage {
    using Pixels = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    GridImage() = default;
    GridImage(Eigen::Index width, Eigen::Index height, Scalar pixel_size = Scalar(1))
        : pixel_size(pixel_size), values(Pixels::Zero(height, width)) {
        if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be >= 1");
        if (!(pixel_size > 0)) throw std::invalid_argument("pixel size must be positive");
    }

    Eigen::Index width() const { return values.cols(); }
    Eigen::Index height() const { return values.rows(); }
    Scalar& operator()(Eigen::Index row, Eigen::Index col) { return values(row, col); }
    Scalar operator()(Eigen::Index row, Eigen::Index col) const { return values(row, col); }

    Scalar pixel_size = Scalar(1);
    Pixels values;
};

/// Row-major flattening: pixel (row, col) becomes entry row * W + col.
template <typename Scalar>
Point<Scalar> vectorize(const GridImage<Scalar>& img) {
    return Eigen::Map<const Point<Scalar>>(img.values.data(), img.values.size());
}

template <typename Scalar>
GridImage<Scalar> devectorize(const Point<Scalar>& x, Eigen::Index width, Eigen::Index height,
                              Scalar pixel_size = Scalar(1)) {
    if (width < 1 || height < 1 || x.size() != width * height) throw DimensionMismatch(width * height, x.size());
    GridImage<Scalar> img(width, height, pixel_size);
    img.values = Eigen::Map<const typename GridImage<Scalar>::Pixels>(x.data(), height, width);
    return img;
}

namespace detail {

template <typename Pixels>
auto tv_sum(const Pixels& q) {
    using Scalar = typename Pixels::Scalar;
    Scalar total = 0;
    for (Eigen::Index g = 0; g + 1 < q.rows(); ++g)
        for (Eigen::Index h = 0; h + 1 < q.cols(); ++h) {
            const Scalar down = q(g + 1, h) - q(g, h);
            const Scalar right = q(g, h + 1) - q(g, h);
            total += std::sqrt(down * down + right * right);
        }
    return total;
}

// Each term sqrt(down^2 + right^2 + delta^2) touches (g,h), (g+1,h) and (g,h+1). With
// delta == 0 a term whose differences both vanish contributes nothing.
template <typename Pixels>
Pixels tv_gradient(const Pixels& q, typename Pixels::Scalar delta) {
    using Scalar = typename Pixels::Scalar;
    Pixels grad = Pixels::Zero(q.rows(), q.cols());
    for (Eigen::Index g = 0; g + 1 < q.rows(); ++g)
        for (Eigen::Index h = 0; h + 1 < q.cols(); ++h) {
            const Scalar down = q(g + 1, h) - q(g, h);
            const Scalar right = q(g, h + 1) - q(g, h);
            const Scalar n = std::sqrt(down * down + right * right + delta * delta);
            if (n == Scalar(0)) continue;
            grad(g + 1, h) += down / n;
            grad(g, h + 1) += right / n;
            grad(g, h) -= (down + right) / n;
        }
    return grad;
}

}  // namespace detail

/// Sum over interior anchors (g, h), g < H-1, h < W-1, of the forward-difference magnitude.
/// The last row and column only enter as neighbours.
template <typename Scalar>
Scalar tv_value(const GridImage<Scalar>& img) {
    return detail::tv_sum(img.values);
}

/// Gradient of tv_value where it exists; terms at a kink contribute zero.
template <typename Scalar>
Point<Scalar> tv_subgradient(const GridImage<Scalar>& img) {
    const auto g = detail::tv_gradient(img.values, Scalar(0));
    return Eigen::Map<const Point<Scalar>>(g.data(), g.size());
}

/// Total variation of a point read as a W x H row-major image.
///
/// With a positive smoothing parameter the objective becomes the smoothed variant
/// sum sqrt(dx^2 + dy^2 + delta^2), which is differentiable everywhere but is a different
/// function. The default is the exact total variation with the zero-contribution kink rule.
template <typename Scalar>
class TotalVariation final : public ConvexObjective<Scalar> {
public:
    using Pixels = typename GridImage<Scalar>::Pixels;

    TotalVariation(Eigen::Index width, Eigen::Index height, Scalar smoothing = Scalar(0))
        : width_(width), height_(height), smoothing_(smoothing) {
        if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be >= 1");
        if (smoothing < Scalar(0)) throw std::invalid_argument("smoothing must be nonnegative");
    }

    Scalar value(const Point<Scalar>& x) const override {
        const auto q = map(x);
        if (smoothing_ == Scalar(0)) return detail::tv_sum(q);
        Scalar total = 0;
        for (Eigen::Index g = 0; g + 1 < height_; ++g)
            for (Eigen::Index h = 0; h + 1 < width_; ++h) {
                const Scalar down = q(g + 1, h) - q(g, h);
                const Scalar right = q(g, h + 1) - q(g, h);
                total += std::sqrt(down * down + right * right + smoothing_ * smoothing_);
            }
        return total;
    }

    Point<Scalar> subgradient(const Point<Scalar>& x) const override {
        const Pixels g = detail::tv_gradient(Pixels(map(x)), smoothing_);
        return Eigen::Map<const Point<Scalar>>(g.data(), g.size());
    }

    Eigen::Index width() const { return width_; }
    Eigen::Index height() const { return height_; }

private:
    Eigen::Map<const Pixels> map(const Point<Scalar>& x) const {
        if (x.size() != width_ * height_) throw DimensionMismatch(width_ * height_, x.size());
        return Eigen::Map<const Pixels>(x.data(), height_, width_);
    }

    Eigen::Index width_;
    Eigen::Index height_;
    Scalar smoothing_;
};

}  // namespace superior
