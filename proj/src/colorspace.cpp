#include "lumalink/colorspace.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace lumalink {

namespace {

// sRGB -> XYZ (linear light), D65 white, 2-degree observer.
const Eigen::Matrix3d& srgb_to_xyz_matrix() {
    static const Eigen::Matrix3d m = [] {
        Eigen::Matrix3d m;
        m << 0.4124564, 0.3575761, 0.1804375,
             0.2126729, 0.7151522, 0.0721750,
             0.0193339, 0.1191920, 0.9503041;
        return m;
    }();
    return m;
}

// Numeric inverse of the forward matrix, so a full round trip is limited only
// by floating-point rounding rather than by published 7-digit constants.
const Eigen::Matrix3d& xyz_to_srgb_matrix() {
    static const Eigen::Matrix3d inv = srgb_to_xyz_matrix().inverse();
    return inv;
}

// White point = forward matrix applied to (1,1,1); guarantees that pure white
// maps to L*=100, a*=b*=0 exactly.
const Eigen::Vector3d& white_point() {
    static const Eigen::Vector3d wp = srgb_to_xyz_matrix() * Eigen::Vector3d::Ones();
    return wp;
}

const std::array<double, 256>& srgb_linear_lut() {
    static const std::array<double, 256> lut = [] {
        std::array<double, 256> t{};
        for (int i = 0; i < 256; ++i) {
            const double c = i / 255.0;
            t[i] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
        }
        return t;
    }();
    return lut;
}

constexpr double kDelta = 6.0 / 29.0;
constexpr double kDelta3 = kDelta * kDelta * kDelta;

double lab_f(double t) {
    return t > kDelta3 ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double f) {
    return f > kDelta ? f * f * f : 3.0 * kDelta * kDelta * (f - 4.0 / 29.0);
}

double gamma_encode(double lin) {
    if (lin <= 0.0031308) return 12.92 * lin;
    return 1.055 * std::pow(lin, 1.0 / 2.4) - 0.055;
}

std::uint8_t quantize_channel(double v) {
    const long scaled = std::lround(v * 255.0);
    if (scaled < 0) return 0;
    if (scaled > 255) return 255;
    return static_cast<std::uint8_t>(scaled);
}

}  // namespace

template <typename T>
LabFrameT<T> srgb_to_lab(const RgbFrame& frame) {
    if (!frame.valid()) throw std::invalid_argument("srgb_to_lab: invalid RgbFrame");
    const auto& lut = srgb_linear_lut();
    const Eigen::Matrix3d& m = srgb_to_xyz_matrix();
    const Eigen::Vector3d& wp = white_point();

    LabFrameT<T> out(frame.width, frame.height);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const std::uint8_t* p = frame.px(y, x);
            const Eigen::Vector3d rgb(lut[p[0]], lut[p[1]], lut[p[2]]);
            const Eigen::Vector3d xyz = m * rgb;
            const double fx = lab_f(xyz.x() / wp.x());
            const double fy = lab_f(xyz.y() / wp.y());
            const double fz = lab_f(xyz.z() / wp.z());
            out.L(y, x) = static_cast<T>(116.0 * fy - 16.0);
            out.a(y, x) = static_cast<T>(500.0 * (fx - fy));
            out.b(y, x) = static_cast<T>(200.0 * (fy - fz));
        }
    }
    return out;
}

template <typename T>
RgbFrame lab_to_srgb(const LabFrameT<T>& frame) {
    const int w = frame.width();
    const int h = frame.height();
    if (w < 1 || h < 1) throw std::invalid_argument("lab_to_srgb: empty frame");
    const Eigen::Matrix3d& inv = xyz_to_srgb_matrix();
    const Eigen::Vector3d& wp = white_point();

    RgbFrame out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double fy = (static_cast<double>(frame.L(y, x)) + 16.0) / 116.0;
            const double fx = fy + static_cast<double>(frame.a(y, x)) / 500.0;
            const double fz = fy - static_cast<double>(frame.b(y, x)) / 200.0;
            const Eigen::Vector3d xyz(lab_f_inv(fx) * wp.x(), lab_f_inv(fy) * wp.y(),
                                      lab_f_inv(fz) * wp.z());
            const Eigen::Vector3d rgb = inv * xyz;
            std::uint8_t* p = out.px(y, x);
            p[0] = quantize_channel(gamma_encode(rgb.x()));
            p[1] = quantize_channel(gamma_encode(rgb.y()));
            p[2] = quantize_channel(gamma_encode(rgb.z()));
        }
    }
    return out;
}

double perceptual_delta(double l_star, const PerceptionParams& p) {
    const double d = l_star - 50.0;
    const double bracket = 1.0 + 0.015 * d * d / std::sqrt(20.0 + d * d);
    return p.k_l * bracket * p.delta_e00;
}

template <typename T>
Plane<T> perceptual_delta_map(const Plane<T>& l_star, const PerceptionParams& p) {
    const auto d = l_star.template cast<double>() - 50.0;
    const auto d2 = d * d;
    return (p.k_l * (1.0 + 0.015 * d2 / (20.0 + d2).sqrt()) * p.delta_e00).template cast<T>();
}

template LabFrameT<float> srgb_to_lab<float>(const RgbFrame&);
template LabFrameT<double> srgb_to_lab<double>(const RgbFrame&);
template RgbFrame lab_to_srgb<float>(const LabFrameT<float>&);
template RgbFrame lab_to_srgb<double>(const LabFrameT<double>&);
template Plane<float> perceptual_delta_map<float>(const Plane<float>&, const PerceptionParams&);
template Plane<double> perceptual_delta_map<double>(const Plane<double>&, const PerceptionParams&);

}  // namespace lumalink
