#include "lumalink/texture.hpp"

#include <cmath>
#include <vector>

namespace lumalink {

namespace {

// Border clamping makes any window that still reaches the image well defined
// (a 3-window on a 2x2 image covers the whole image from every pixel), so
// only reject windows too large to clamp meaningfully in either dimension.
void check_window_fits(const TextureParams& p, int width, int height) {
    p.validate();
    if (p.window > 2 * width - 1 && p.window > 2 * height - 1) {
        throw std::invalid_argument("texture: window larger than both image dimensions");
    }
}

struct WindowBounds {
    int y0, y1, x0, x1;  // inclusive, clamped to the image
};

WindowBounds clamp_window(int y, int x, int radius, int width, int height) {
    return {y - radius < 0 ? 0 : y - radius, y + radius >= height ? height - 1 : y + radius,
            x - radius < 0 ? 0 : x - radius, x + radius >= width ? width - 1 : x + radius};
}

}  // namespace

template <typename T>
PlaneI quantize_levels(const Plane<T>& l_star, int ng) {
    PlaneI out(l_star.rows(), l_star.cols());
    for (Eigen::Index y = 0; y < l_star.rows(); ++y) {
        for (Eigen::Index x = 0; x < l_star.cols(); ++x) {
            long v = std::lround(static_cast<double>(l_star(y, x)));
            if (v < 0) v = 0;
            if (v > ng - 1) v = ng - 1;
            out(y, x) = static_cast<int>(v);
        }
    }
    return out;
}

PlaneD glcm_contrast_reference(const PlaneI& img, const TextureParams& p) {
    const int w = static_cast<int>(img.cols());
    const int h = static_cast<int>(img.rows());
    check_window_fits(p, w, h);
    if ((img < 0).any() || (img >= p.ng).any()) {
        throw std::invalid_argument("glcm_contrast_reference: levels must be in [0, ng)");
    }

    const int radius = p.window / 2;
    const int ng = p.ng;
    std::vector<double> glcm(static_cast<std::size_t>(ng) * ng);
    PlaneD out = PlaneD::Zero(h, w);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const WindowBounds b = clamp_window(y, x, radius, w, h);
            const int pairs = (b.y1 - b.y0 + 1) * (b.x1 - b.x0);
            if (pairs == 0) continue;

            std::fill(glcm.begin(), glcm.end(), 0.0);
            for (int r = b.y0; r <= b.y1; ++r) {
                for (int c = b.x0; c < b.x1; ++c) {
                    glcm[static_cast<std::size_t>(img(r, c)) * ng + img(r, c + 1)] += 1.0;
                }
            }
            const double norm = 1.0 / pairs;

            // C = sum_n n^2 * sum_{|i-j|=n} p(i,j), walking each |i-j|=n diagonal.
            double contrast = 0.0;
            for (int n = 0; n < ng; ++n) {
                double diag = 0.0;
                if (n == 0) {
                    for (int i = 0; i < ng; ++i) diag += glcm[static_cast<std::size_t>(i) * ng + i];
                } else {
                    for (int i = 0; i + n < ng; ++i) {
                        diag += glcm[static_cast<std::size_t>(i) * ng + (i + n)];
                        diag += glcm[static_cast<std::size_t>(i + n) * ng + i];
                    }
                }
                contrast += static_cast<double>(n) * n * diag * norm;
            }
            out(y, x) = contrast;
        }
    }
    return out;
}

template <typename T>
Plane<T> contrast_optimized(const Plane<T>& img, const TextureParams& p) {
    const int w = static_cast<int>(img.cols());
    const int h = static_cast<int>(img.rows());
    check_window_fits(p, w, h);

    // Squared horizontal neighbor differences, then an integral image so each
    // clamped window sum is four lookups.
    PlaneD diff2 = PlaneD::Zero(h, w > 1 ? w - 1 : 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            const double d = static_cast<double>(img(y, x)) - static_cast<double>(img(y, x + 1));
            diff2(y, x) = d * d;
        }
    }
    const int dw = static_cast<int>(diff2.cols());
    PlaneD sat = PlaneD::Zero(h + 1, dw + 1);
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < dw; ++x) {
            row += diff2(y, x);
            sat(y + 1, x + 1) = sat(y, x + 1) + row;
        }
    }

    const int radius = p.window / 2;
    Plane<T> out = Plane<T>::Zero(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const WindowBounds b = clamp_window(y, x, radius, w, h);
            const int pairs = (b.y1 - b.y0 + 1) * (b.x1 - b.x0);
            if (pairs == 0) continue;
            const double sum =
                sat(b.y1 + 1, b.x1) - sat(b.y0, b.x1) - sat(b.y1 + 1, b.x0) + sat(b.y0, b.x0);
            out(y, x) = static_cast<T>(sum / pairs);
        }
    }
    return out;
}

template <typename T>
Plane<T> texture_metric(const Plane<T>& contrast, const TextureParams& p) {
    const int w = static_cast<int>(contrast.cols());
    const int h = static_cast<int>(contrast.rows());
    check_window_fits(p, w, h);
    const int radius = p.window / 2;
    Plane<T> out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const WindowBounds b = clamp_window(y, x, radius, w, h);
            const int count = (b.y1 - b.y0 + 1) * (b.x1 - b.x0 + 1);
            out(y, x) = static_cast<T>(static_cast<double>(contrast(y, x)) / count);
        }
    }
    return out;
}

template <typename T>
Plane<T> texture_scaling(const Plane<T>& tmetric, const TextureParams& p) {
    p.validate();
    const T tmax = tmetric.maxCoeff();
    if (!(tmax > T(0))) {
        return Plane<T>::Constant(tmetric.rows(), tmetric.cols(), static_cast<T>(p.k));
    }
    return (tmetric / tmax * static_cast<T>(1.0 - p.k) + static_cast<T>(p.k)).eval();
}

template <typename T>
Plane<T> modulation_depth(const Plane<T>& delta_l1, const Plane<T>& alpha) {
    if (delta_l1.rows() != alpha.rows() || delta_l1.cols() != alpha.cols()) {
        throw std::invalid_argument("modulation_depth: dimension mismatch");
    }
    return delta_l1 * alpha;
}

template PlaneI quantize_levels<float>(const Plane<float>&, int);
template PlaneI quantize_levels<double>(const Plane<double>&, int);
template Plane<float> contrast_optimized<float>(const Plane<float>&, const TextureParams&);
template Plane<double> contrast_optimized<double>(const Plane<double>&, const TextureParams&);
template Plane<float> texture_metric<float>(const Plane<float>&, const TextureParams&);
template Plane<double> texture_metric<double>(const Plane<double>&, const TextureParams&);
template Plane<float> texture_scaling<float>(const Plane<float>&, const TextureParams&);
template Plane<double> texture_scaling<double>(const Plane<double>&, const TextureParams&);
template Plane<float> modulation_depth<float>(const Plane<float>&, const Plane<float>&);
template Plane<double> modulation_depth<double>(const Plane<double>&, const Plane<double>&);

}  // namespace lumalink
