#pragma once

#include "lumalink/barcode.hpp"
#include "lumalink/colorspace.hpp"
#include "lumalink/texture.hpp"

#include <vector>

namespace lumalink {

/// How one code frame is spread over display frames.
///  pair:     [+d, -d]           display rate = 2x code rate
///  trivial4: [+d, +d, -d, -d]   display rate = 4x code rate
///  step4:    [ 0, +d,  0, -d]   display rate = 4x code rate, halved transitions
enum class EncodeMode { pair, trivial4, step4 };

enum class FrameRole { plus, minus, rest };

const char* to_string(EncodeMode mode);
EncodeMode encode_mode_from_string(const std::string& name);

struct ModulationParams {
    PerceptionParams perception;
    TextureParams texture;
    TileLayout layout;
    EcLevel ec = EcLevel::L;
    double smoothing_sigma = 1.0;  // 0 disables smoothing
    EncodeMode mode = EncodeMode::pair;
    double fps_tx = 60.0;

    int frames_per_packet() const { return mode == EncodeMode::pair ? 2 : 4; }
    double code_fps() const { return fps_tx / frames_per_packet(); }

    void validate() const {
        perception.validate();
        texture.validate();
        layout.validate();
        if (!(fps_tx > 0)) throw std::invalid_argument("ModulationParams: fps_tx must be > 0");
        if (smoothing_sigma < 0) {
            throw std::invalid_argument("ModulationParams: smoothing_sigma must be >= 0");
        }
    }
};

/// Smoothed code layout, values in [-1, +1]; zero outside the dilation of the
/// tile regions by the kernel radius.
using SmoothPlane = PlaneF;

struct PacketSchedule {
    Payload payload;
    std::size_t first_frame = 0;
    int frame_count = 0;
};

struct EncodedSequence {
    std::vector<LabFrame> frames;
    std::vector<FrameRole> roles;
    std::vector<PacketSchedule> schedule;
    double fps_tx = 60.0;
};

/// Gaussian-smooth the ternary plane. Kernel side 2*ceil(3*sigma)+1,
/// normalized to unit sum, zero padding at frame borders. sigma = 0 is the
/// identity.
SmoothPlane smooth_bitplane(const BitPlane& plane, double sigma);

/// Per-pixel modulation depth: perceptual delta of the lightness channel
/// scaled by the texture factor (closed-form contrast path).
PlaneF depth_map(const LabFrame& lab, const ModulationParams& mp);

/// Complementary pair around the source frame. The applied offset per pixel
/// is sign(s) * min(|s| * depth, L, 100 - L), and the two lightness values
/// are constructed so their sum equals 2 * L exactly in storage precision.
/// a*, b* are copied unchanged.
std::pair<LabFrame, LabFrame> modulate_pair(const LabFrame& lab, const SmoothPlane& s,
                                            const PlaneF& depth);

/// Four display frames for one code frame, in trivial4 or step4 order.
/// The temporal mean over the four frames equals the source exactly.
std::vector<LabFrame> step_encode(const LabFrame& lab, const SmoothPlane& s, const PlaneF& depth,
                                  EncodeMode mode);

/// Full pipeline: one payload per source frame; barcode -> tiles -> smooth ->
/// depth -> modulate, emitting frames at fps_tx with the ground-truth
/// schedule attached.
EncodedSequence encode_video(const std::vector<RgbFrame>& frames,
                             const std::vector<Payload>& payloads, const ModulationParams& mp);

/// encode_video on source frames already converted to Lab.
EncodedSequence encode_video_lab(const std::vector<LabFrame>& frames,
                                 const std::vector<Payload>& payloads,
                                 const ModulationParams& mp);

}  // namespace lumalink
