#include "lumalink/encoder.hpp"

#include <cmath>

namespace lumalink {

const char* to_string(EncodeMode mode) {
    switch (mode) {
        case EncodeMode::pair: return "pair";
        case EncodeMode::trivial4: return "trivial4";
        default: return "step4";
    }
}

EncodeMode encode_mode_from_string(const std::string& name) {
    if (name == "pair") return EncodeMode::pair;
    if (name == "trivial4") return EncodeMode::trivial4;
    if (name == "step4") return EncodeMode::step4;
    throw std::invalid_argument("unknown encode mode '" + name + "'");
}

SmoothPlane smooth_bitplane(const BitPlane& plane, double sigma) {
    if (sigma < 0) throw std::invalid_argument("smooth_bitplane: sigma must be >= 0");
    const int h = static_cast<int>(plane.rows());
    const int w = static_cast<int>(plane.cols());
    if (sigma == 0.0) return plane.cast<float>();

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i / sigma) * (i / sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    // Separable convolution with zero padding.
    PlaneD tmp = PlaneD::Zero(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            const int lo = std::max(0, x - radius);
            const int hi = std::min(w - 1, x + radius);
            for (int i = lo; i <= hi; ++i) acc += kernel[i - x + radius] * plane(y, i);
            tmp(y, x) = acc;
        }
    }
    SmoothPlane out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            const int lo = std::max(0, y - radius);
            const int hi = std::min(h - 1, y + radius);
            for (int i = lo; i <= hi; ++i) acc += kernel[i - y + radius] * tmp(i, x);
            out(y, x) = static_cast<float>(acc);
        }
    }
    return out;
}

PlaneF depth_map(const LabFrame& lab, const ModulationParams& mp) {
    const PlaneF delta1 = perceptual_delta_map(lab.L, mp.perception);
    const PlaneF contrast = contrast_optimized(lab.L, mp.texture);
    const PlaneF tmetric = texture_metric(contrast, mp.texture);
    const PlaneF alpha = texture_scaling(tmetric, mp.texture);
    return modulation_depth(delta1, alpha);
}

namespace {

// Offset the lightness symmetrically so that plus + minus == 2 * L holds
// bit-exactly in float. The candidate plus value is nudged by ulps until the
// mirrored minus value is exactly representable; the applied depth changes by
// at most a few ulps.
inline void exact_pair(float l, double offset, float* plus, float* minus) {
    const double l2 = 2.0 * static_cast<double>(l);
    float p = static_cast<float>(static_cast<double>(l) + offset);
    for (int tries = 0; tries < 8; ++tries) {
        const double target = l2 - static_cast<double>(p);  // exact in double
        const float q = static_cast<float>(target);
        if (static_cast<double>(q) == target && p >= 0.0f && p <= 100.0f && q >= 0.0f &&
            q <= 100.0f) {
            *plus = p;
            *minus = q;
            return;
        }
        p = std::nextafter(p, l);  // walk back toward the unmodulated value
    }
    *plus = l;
    *minus = l;
}

}  // namespace

std::pair<LabFrame, LabFrame> modulate_pair(const LabFrame& lab, const SmoothPlane& s,
                                            const PlaneF& depth) {
    const int h = lab.height();
    const int w = lab.width();
    if (s.rows() != h || s.cols() != w || depth.rows() != h || depth.cols() != w) {
        throw std::invalid_argument("modulate_pair: dimension mismatch");
    }

    LabFrame plus = lab;
    LabFrame minus = lab;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double sv = s(y, x);
            if (sv == 0.0) continue;  // background stays bit-identical
            const double l = lab.L(y, x);
            const double headroom = std::max(0.0, std::min(l, 100.0 - l));
            const double eff = std::min(std::abs(sv) * static_cast<double>(depth(y, x)), headroom);
            const double offset = sv >= 0.0 ? eff : -eff;
            exact_pair(lab.L(y, x), offset, &plus.L(y, x), &minus.L(y, x));
        }
    }
    return {std::move(plus), std::move(minus)};
}

std::vector<LabFrame> step_encode(const LabFrame& lab, const SmoothPlane& s, const PlaneF& depth,
                                  EncodeMode mode) {
    if (mode == EncodeMode::pair) throw std::invalid_argument("step_encode: mode must emit 4 frames");
    auto [plus, minus] = modulate_pair(lab, s, depth);
    std::vector<LabFrame> out;
    out.reserve(4);
    if (mode == EncodeMode::trivial4) {
        out.push_back(plus);
        out.push_back(plus);
        out.push_back(minus);
        out.push_back(std::move(minus));
    } else {
        out.push_back(lab);
        out.push_back(std::move(plus));
        out.push_back(lab);
        out.push_back(std::move(minus));
    }
    return out;
}

EncodedSequence encode_video_lab(const std::vector<LabFrame>& frames,
                                 const std::vector<Payload>& payloads,
                                 const ModulationParams& mp) {
    mp.validate();
    if (frames.size() != payloads.size()) {
        throw std::invalid_argument("encode_video: one payload per source frame required");
    }
    EncodedSequence seq;
    seq.fps_tx = mp.fps_tx;
    const int per = mp.frames_per_packet();
    seq.frames.reserve(frames.size() * per);
    seq.roles.reserve(frames.size() * per);

    static const std::vector<FrameRole> kPairRoles = {FrameRole::plus, FrameRole::minus};
    static const std::vector<FrameRole> kTrivialRoles = {FrameRole::plus, FrameRole::plus,
                                                         FrameRole::minus, FrameRole::minus};
    static const std::vector<FrameRole> kStepRoles = {FrameRole::rest, FrameRole::plus,
                                                      FrameRole::rest, FrameRole::minus};

    for (std::size_t i = 0; i < frames.size(); ++i) {
        const LabFrame& lab = frames[i];
        const qr::Matrix matrix = encode_payload(payloads[i], mp.ec);
        const BitPlane plane = render_tiles(matrix, lab.width(), lab.height(), mp.layout);
        const SmoothPlane s = smooth_bitplane(plane, mp.smoothing_sigma);
        const PlaneF depth = depth_map(lab, mp);

        seq.schedule.push_back({payloads[i], seq.frames.size(), per});
        if (mp.mode == EncodeMode::pair) {
            auto [plus, minus] = modulate_pair(lab, s, depth);
            seq.frames.push_back(std::move(plus));
            seq.frames.push_back(std::move(minus));
            seq.roles.insert(seq.roles.end(), kPairRoles.begin(), kPairRoles.end());
        } else {
            auto four = step_encode(lab, s, depth, mp.mode);
            for (auto& f : four) seq.frames.push_back(std::move(f));
            const auto& roles = mp.mode == EncodeMode::trivial4 ? kTrivialRoles : kStepRoles;
            seq.roles.insert(seq.roles.end(), roles.begin(), roles.end());
        }
    }
    return seq;
}

EncodedSequence encode_video(const std::vector<RgbFrame>& frames,
                             const std::vector<Payload>& payloads, const ModulationParams& mp) {
    std::vector<LabFrame> lab;
    lab.reserve(frames.size());
    for (const RgbFrame& f : frames) lab.push_back(srgb_to_lab<float>(f));
    return encode_video_lab(lab, payloads, mp);
}

}  // namespace lumalink
