#pragma once

#include "lumalink/image.hpp"

namespace lumalink {

struct TextureParams {
    int window = 5;   // odd side length of the analysis window
    double k = 0.5;   // floor of the texture scaling factor
    int ng = 101;     // gray-level count for the reference GLCM path

    void validate() const {
        if (window < 3 || window % 2 == 0) {
            throw std::invalid_argument("TextureParams: window must be odd and >= 3");
        }
        if (k < 0.0 || k > 1.0) throw std::invalid_argument("TextureParams: k must be in [0,1]");
        if (ng < 2) throw std::invalid_argument("TextureParams: ng must be >= 2");
    }
};

/// Quantize a lightness plane to integer levels 0..ng-1 (round, then clamp).
template <typename T>
PlaneI quantize_levels(const Plane<T>& l_star, int ng);

/// Per-pixel GLCM contrast, computed by literally building the co-occurrence
/// matrix of horizontal neighbor pairs in the clamped window around each
/// pixel and evaluating sum_n n^2 * sum_{|i-j|=n} p(i,j). Slow; kept as the
/// reference the closed form is checked against.
PlaneD glcm_contrast_reference(const PlaneI& img, const TextureParams& p);

/// Closed-form contrast: window mean of squared horizontal neighbor
/// differences, normalized by the clamped pair count H*(W-1). Identical to
/// the reference on quantized inputs, without building any GLCM.
template <typename T>
Plane<T> contrast_optimized(const Plane<T>& img, const TextureParams& p);

/// Average texture metric T = C / S with S the clamped window pixel count.
template <typename T>
Plane<T> texture_metric(const Plane<T>& contrast, const TextureParams& p);

/// Texture scaling alpha = (T / T_max) * (1 - k) + k, with T_max the frame
/// maximum. A textureless frame (T_max = 0) degenerates to alpha = k.
template <typename T>
Plane<T> texture_scaling(const Plane<T>& tmetric, const TextureParams& p);

/// Final per-pixel modulation depth dL2 = dL1 * alpha.
template <typename T>
Plane<T> modulation_depth(const Plane<T>& delta_l1, const Plane<T>& alpha);

}  // namespace lumalink
