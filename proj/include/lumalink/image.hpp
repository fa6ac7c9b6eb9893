#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lumalink {

/// Dense 2-D pixel plane indexed as (row, col) = (y, x).
template <typename T>
using Plane = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PlaneF = Plane<float>;
using PlaneD = Plane<double>;
using PlaneI = Plane<int>;
using PlaneU8 = Plane<std::uint8_t>;
using PlaneI8 = Plane<std::int8_t>;

/// 8-bit interleaved sRGB frame, row-major r,g,b triplets.
struct RgbFrame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    RgbFrame() = default;
    RgbFrame(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {
        if (w < 1 || h < 1) {
            throw std::invalid_argument("RgbFrame: dimensions must be >= 1");
        }
    }

    std::uint8_t* px(int y, int x) { return data.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const std::uint8_t* px(int y, int x) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    bool valid() const {
        return width >= 1 && height >= 1 &&
               data.size() == static_cast<std::size_t>(width) * height * 3;
    }
};

/// Per-pixel CIELAB frame. L in [0,100]; a,b unbounded (typically [-128,127]).
template <typename T>
struct LabFrameT {
    Plane<T> L, a, b;

    LabFrameT() = default;
    LabFrameT(int w, int h)
        : L(Plane<T>::Zero(h, w)), a(Plane<T>::Zero(h, w)), b(Plane<T>::Zero(h, w)) {}

    int width() const { return static_cast<int>(L.cols()); }
    int height() const { return static_cast<int>(L.rows()); }

    bool same_shape(const LabFrameT& o) const {
        return L.rows() == o.L.rows() && L.cols() == o.L.cols();
    }
};

using LabFrame = LabFrameT<float>;

/// Bilinear sample of a plane at (x, y), clamping coordinates to the border.
template <typename T>
T sample_bilinear_clamped(const Plane<T>& p, double x, double y) {
    const int w = static_cast<int>(p.cols());
    const int h = static_cast<int>(p.rows());
    if (x < 0) x = 0;
    if (y < 0) y = 0;
    if (x > w - 1) x = static_cast<double>(w - 1);
    if (y > h - 1) y = static_cast<double>(h - 1);
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = x0 + 1 < w ? x0 + 1 : x0;
    const int y1 = y0 + 1 < h ? y0 + 1 : y0;
    const double fx = x - x0;
    const double fy = y - y0;
    const double v = (1.0 - fy) * ((1.0 - fx) * p(y0, x0) + fx * p(y0, x1)) +
                     fy * ((1.0 - fx) * p(y1, x0) + fx * p(y1, x1));
    return static_cast<T>(v);
}

}  // namespace lumalink
