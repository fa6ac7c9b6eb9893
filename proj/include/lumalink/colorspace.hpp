#pragma once

#include "lumalink/image.hpp"

namespace lumalink {

/// Controls how strongly data is embedded: the target perceived color
/// difference between the two frames of a complementary pair, plus a
/// viewing-condition compensation factor.
struct PerceptionParams {
    double delta_e00 = 2.0;
    double k_l = 1.0;

    void validate() const {
        if (!(delta_e00 > 0.0)) throw std::invalid_argument("PerceptionParams: delta_e00 must be > 0");
        if (!(k_l > 0.0)) throw std::invalid_argument("PerceptionParams: k_l must be > 0");
    }
};

/// sRGB (8-bit, D65, standard transfer function) -> CIELAB.
template <typename T>
LabFrameT<T> srgb_to_lab(const RgbFrame& frame);

/// CIELAB -> sRGB. Out-of-gamut channels are clamped to [0,255].
template <typename T>
RgbFrame lab_to_srgb(const LabFrameT<T>& frame);

/// Lightness-dependent modulation depth derived from the CIEDE2000 lightness
/// term: dL1 = k_l * [1 + 0.015 (L-50)^2 / sqrt(20 + (L-50)^2)] * dE00.
/// Minimized at L = 50 where it equals k_l * dE00.
double perceptual_delta(double l_star, const PerceptionParams& p);

/// Vectorized perceptual_delta over a lightness plane.
template <typename T>
Plane<T> perceptual_delta_map(const Plane<T>& l_star, const PerceptionParams& p);

}  // namespace lumalink
