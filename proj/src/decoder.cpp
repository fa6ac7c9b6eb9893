#include "lumalink/decoder.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace lumalink {

namespace {

struct Corner {
    int x, y;
    float response;
};

// Shi-Tomasi corners: min eigenvalue of the 3x3-summed structure tensor,
// 7x7 non-maximum suppression.
std::vector<Corner> detect_corners(const PlaneF& img, int max_corners) {
    const int h = static_cast<int>(img.rows());
    const int w = static_cast<int>(img.cols());
    if (h < 16 || w < 16) return {};

    PlaneF ix = PlaneF::Zero(h, w), iy = PlaneF::Zero(h, w);
    for (int y = 1; y + 1 < h; ++y) {
        for (int x = 1; x + 1 < w; ++x) {
            ix(y, x) = 0.5f * (img(y, x + 1) - img(y, x - 1));
            iy(y, x) = 0.5f * (img(y + 1, x) - img(y - 1, x));
        }
    }
    PlaneF resp = PlaneF::Zero(h, w);
    for (int y = 2; y + 2 < h; ++y) {
        for (int x = 2; x + 2 < w; ++x) {
            double sxx = 0, syy = 0, sxy = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const double gx = ix(y + dy, x + dx);
                    const double gy = iy(y + dy, x + dx);
                    sxx += gx * gx;
                    syy += gy * gy;
                    sxy += gx * gy;
                }
            }
            const double tr = sxx + syy;
            const double det = sxx * syy - sxy * sxy;
            const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
            resp(y, x) = static_cast<float>(tr / 2.0 - disc);  // min eigenvalue
        }
    }
    const float thresh = 0.01f * resp.maxCoeff();
    if (!(thresh > 0)) return {};

    std::vector<Corner> corners;
    for (int y = 3; y + 3 < h; ++y) {
        for (int x = 3; x + 3 < w; ++x) {
            const float r = resp(y, x);
            if (r <= thresh) continue;
            bool is_max = true;
            for (int dy = -3; dy <= 3 && is_max; ++dy) {
                for (int dx = -3; dx <= 3; ++dx) {
                    if (resp(y + dy, x + dx) > r) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) corners.push_back({x, y, r});
        }
    }
    std::sort(corners.begin(), corners.end(),
              [](const Corner& a, const Corner& b) { return a.response > b.response; });
    if (static_cast<int>(corners.size()) > max_corners) corners.resize(max_corners);
    return corners;
}

struct Match {
    double px, py;  // prev
    double cx, cy;  // curr
};

constexpr int kPatchRadius = 4;
constexpr int kSearchRadius = 10;
constexpr int kMinInliers = 8;

// Exhaustive SSD search in a small window, parabolic subpixel refinement.
std::optional<Match> track_corner(const PlaneF& prev, const PlaneF& curr, int px, int py) {
    const int h = static_cast<int>(prev.rows());
    const int w = static_cast<int>(prev.cols());
    if (px - kPatchRadius - kSearchRadius < 0 || px + kPatchRadius + kSearchRadius >= w ||
        py - kPatchRadius - kSearchRadius < 0 || py + kPatchRadius + kSearchRadius >= h) {
        return std::nullopt;
    }
    auto ssd_at = [&](int ox, int oy) {
        double ssd = 0;
        for (int dy = -kPatchRadius; dy <= kPatchRadius; ++dy) {
            for (int dx = -kPatchRadius; dx <= kPatchRadius; ++dx) {
                const double d = curr(py + oy + dy, px + ox + dx) - prev(py + dy, px + dx);
                ssd += d * d;
            }
        }
        return ssd;
    };
    int bx = 0, by = 0;
    double best = -1;
    for (int oy = -kSearchRadius; oy <= kSearchRadius; ++oy) {
        for (int ox = -kSearchRadius; ox <= kSearchRadius; ++ox) {
            const double s = ssd_at(ox, oy);
            if (best < 0 || s < best) {
                best = s;
                bx = ox;
                by = oy;
            }
        }
    }
    double fx = bx, fy = by;
    if (std::abs(bx) < kSearchRadius) {
        const double l = ssd_at(bx - 1, by), r = ssd_at(bx + 1, by);
        const double denom = l - 2 * best + r;
        if (denom > 1e-12) fx = bx + 0.5 * (l - r) / denom;
    }
    if (std::abs(by) < kSearchRadius) {
        const double u = ssd_at(bx, by - 1), d = ssd_at(bx, by + 1);
        const double denom = u - 2 * best + d;
        if (denom > 1e-12) fy = by + 0.5 * (u - d) / denom;
    }
    return Match{static_cast<double>(px), static_cast<double>(py), px + fx, py + fy};
}

std::optional<AffineSimilarity> fit_similarity(const std::vector<Match>& matches) {
    if (matches.size() < 2) return std::nullopt;
    Eigen::MatrixXd A(2 * matches.size(), 4);
    Eigen::VectorXd rhs(2 * matches.size());
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const Match& m = matches[i];
        A.row(2 * i) << m.px, -m.py, 1, 0;
        A.row(2 * i + 1) << m.py, m.px, 0, 1;
        rhs(2 * i) = m.cx;
        rhs(2 * i + 1) = m.cy;
    }
    const Eigen::Vector4d sol = (A.transpose() * A).ldlt().solve(A.transpose() * rhs);
    if (!sol.allFinite()) return std::nullopt;
    return AffineSimilarity{sol(0), sol(1), sol(2), sol(3)};
}

LabFrame warp_to_reference(const LabFrame& curr, const AffineSimilarity& t) {
    const int h = curr.height();
    const int w = curr.width();
    LabFrame out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto [sx, sy] = t.apply(x, y);
            out.L(y, x) = sample_bilinear_clamped(curr.L, sx, sy);
            out.a(y, x) = sample_bilinear_clamped(curr.a, sx, sy);
            out.b(y, x) = sample_bilinear_clamped(curr.b, sx, sy);
        }
    }
    return out;
}

}  // namespace

AlignResult align_frames(const LabFrame& prev, const LabFrame& curr) {
    if (!prev.same_shape(curr)) throw std::invalid_argument("align_frames: shape mismatch");

    AlignResult res;
    const auto corners = detect_corners(prev.L, 150);
    std::vector<Match> matches;
    matches.reserve(corners.size());
    for (const Corner& c : corners) {
        if (auto m = track_corner(prev.L, curr.L, c.x, c.y)) matches.push_back(*m);
    }

    std::vector<Match> active = matches;
    std::optional<AffineSimilarity> fit;
    for (int round = 0; round < 4 && static_cast<int>(active.size()) >= kMinInliers; ++round) {
        fit = fit_similarity(active);
        if (!fit) break;
        std::vector<double> residuals(active.size());
        for (std::size_t i = 0; i < active.size(); ++i) {
            const auto [qx, qy] = fit->apply(active[i].px, active[i].py);
            residuals[i] = std::hypot(qx - active[i].cx, qy - active[i].cy);
        }
        std::vector<double> sorted = residuals;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double gate = std::max(0.75, 2.5 * sorted[sorted.size() / 2]);
        std::vector<Match> inliers;
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (residuals[i] <= gate) inliers.push_back(active[i]);
        }
        if (inliers.size() == active.size()) break;
        active = std::move(inliers);
    }

    if (!fit || static_cast<int>(active.size()) < kMinInliers) {
        res.fallback_identity = true;
        res.aligned = curr;
        return res;
    }
    res.transform = *fit;
    res.inliers = static_cast<int>(active.size());
    res.aligned = res.transform.is_identity() ? curr : warp_to_reference(curr, res.transform);
    return res;
}

DiffFrame subtract(const LabFrame& a, const LabFrame& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("subtract: shape mismatch");
    return a.L - b.L;
}

std::optional<BBox> detect_roi(const DiffFrame& d, const DecoderConfig& cfg) {
    cfg.validate();
    const int h = static_cast<int>(d.rows());
    const int w = static_cast<int>(d.cols());
    Plane<std::uint8_t> mask(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            mask(y, x) = std::abs(d(y, x)) > cfg.roi_threshold ? 1 : 0;
        }
    }

    // 8-connected components; keep those >= min_region_px.
    BBox box{w, h, -1, -1};
    std::vector<int> stack;
    std::vector<std::pair<int, int>> component;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x)) continue;
            component.clear();
            stack.push_back(y * w + x);
            mask(y, x) = 0;
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                const int cy = idx / w, cx = idx % w;
                component.emplace_back(cx, cy);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int ny = cy + dy, nx = cx + dx;
                        if (ny < 0 || ny >= h || nx < 0 || nx >= w || !mask(ny, nx)) continue;
                        mask(ny, nx) = 0;
                        stack.push_back(ny * w + nx);
                    }
                }
            }
            if (static_cast<int>(component.size()) < cfg.min_region_px) continue;
            for (const auto& [cx, cy] : component) {
                box.x0 = std::min(box.x0, cx);
                box.y0 = std::min(box.y0, cy);
                box.x1 = std::max(box.x1, cx);
                box.y1 = std::max(box.y1, cy);
            }
        }
    }
    if (box.x1 < 0) return std::nullopt;
    return box;
}

std::pair<PlaneF, PlaneF> binarize_roi(const DiffFrame& d, const BBox& box, double threshold) {
    const int bw = box.width();
    const int bh = box.height();
    PlaneF pos(bh, bw), neg(bh, bw);
    for (int y = 0; y < bh; ++y) {
        for (int x = 0; x < bw; ++x) {
            const bool light = d(box.y0 + y, box.x0 + x) > threshold;
            pos(y, x) = light ? 255.0f : 0.0f;
            neg(y, x) = light ? 0.0f : 255.0f;
        }
    }
    return {std::move(pos), std::move(neg)};
}

StreamDecoder::StreamDecoder(const DecoderConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

void StreamDecoder::push(const LabFrame& frame, double timestamp_ms, long slot) {
    ++kept_index_;
    if (!have_prev_) {
        prev_ = frame;
        prev_ts_ = timestamp_ms;
        prev_slot_ = slot;
        have_prev_ = true;
        return;
    }

    const int pair_parity = static_cast<int>(kept_index_ & 1);
    const LabFrame* curr = &frame;
    LabFrame aligned;
    if (cfg_.motion_comp) {
        aligned = align_frames(prev_, frame).aligned;
        curr = &aligned;
    }
    const DiffFrame diff = subtract(*curr, prev_);

    const bool attempt = !state_.synced || pair_parity == state_.parity;
    if (attempt) {
        ++attempts_;
        const auto t0 = std::chrono::steady_clock::now();
        std::optional<Payload> decoded;
        if (const auto roi = detect_roi(diff, cfg_)) {
            auto [pos, neg] = binarize_roi(diff, *roi, cfg_.binarize_threshold);
            decoded = decode_matrix(pos);
            if (!decoded) decoded = decode_matrix(neg);
        }
        const double latency =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();

        if (decoded) {
            ++successes_;
            results_.push_back({*decoded, timestamp_ms, latency, prev_slot_, slot});
            state_.synced = true;
            state_.parity = pair_parity;
            state_.consecutive_failures = 0;
        } else if (state_.synced) {
            if (++state_.consecutive_failures > cfg_.resync_failures) {
                state_.synced = false;
                state_.consecutive_failures = 0;
            }
        }
    }

    prev_ = frame;
    prev_ts_ = timestamp_ms;
    prev_slot_ = slot;
}

StreamOutput stream_decode(const CapturedSequence& cap, const DecoderConfig& cfg) {
    if (cap.frames.size() < 2) throw std::invalid_argument("stream_decode: need at least 2 frames");
    StreamDecoder dec(cfg);
    for (long slot = 0; slot < static_cast<long>(cap.frames.size()); ++slot) {
        const CapturedFrame& cf = cap.frames[slot];
        if (cf.dropped) continue;
        dec.push(cf.frame, cf.timestamp_ms, slot);
    }
    StreamOutput out;
    out.results = dec.results();
    out.attempts = dec.attempts();
    out.successes = dec.successes();
    out.final_state = dec.sync();
    return out;
}

LinkMetrics compute_metrics(const std::vector<PacketResult>& results,
                            const std::vector<PacketSchedule>& ground_truth, double fps_tx,
                            long attempts, long successes) {
    LinkMetrics m;
    m.attempts = attempts;
    m.successes = successes;
    m.packets_transmitted = static_cast<long>(ground_truth.size());

    std::vector<double> success_times;
    success_times.reserve(results.size());
    for (const auto& r : results) success_times.push_back(r.capture_timestamp_ms);
    std::sort(success_times.begin(), success_times.end());

    for (const auto& gt : ground_truth) {
        const bool decoded = std::any_of(results.begin(), results.end(), [&](const PacketResult& r) {
            return r.payload == gt.payload;
        });
        if (decoded) ++m.packets_decoded;

        const double start_ms = 1000.0 * static_cast<double>(gt.first_frame) / fps_tx;
        const auto it = std::lower_bound(success_times.begin(), success_times.end(), start_ms);
        if (it != success_times.end()) m.response_time_samples_ms.push_back(*it - start_ms);
    }
    m.psr = ground_truth.empty()
                ? 0.0
                : static_cast<double>(m.packets_decoded) / static_cast<double>(ground_truth.size());
    return m;
}

std::vector<std::pair<double, double>> response_time_cdf(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    std::vector<std::pair<double, double>> cdf;
    cdf.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        cdf.emplace_back(samples[i], static_cast<double>(i + 1) / samples.size());
    }
    return cdf;
}

}  // namespace lumalink
