#pragma once

#include "lumalink/image.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lumalink::qr {

/// Module matrix, 1 = dark, 0 = light. Square, side 17 + 4 * version.
using Matrix = PlaneU8;

enum class EcLevel { L, M, Q, H };

/// Nominal recovery capacity of each level, as a fraction of codewords.
double ec_recovery_rate(EcLevel ec);

struct SymbolInfo {
    int version = 0;
    int side = 0;
    int total_codewords = 0;
    int data_codewords = 0;
    int ec_per_block = 0;
    int block_count = 0;
    /// Codeword errors correctable per RS block (floor(ec_per_block / 2)).
    int correctable_per_block = 0;
};

SymbolInfo symbol_info(int version, EcLevel ec);

/// Smallest version (1..10) whose byte-mode capacity fits the payload.
/// Throws std::length_error when nothing fits.
int smallest_version(std::size_t payload_bytes, EcLevel ec);

/// Encode bytes in byte mode at the smallest fitting version.
Matrix encode_bytes(const std::string& payload, EcLevel ec);

/// Decode a clean module matrix. Returns the payload bytes, or nullopt when
/// format/RS decoding fails.
std::optional<std::string> decode_matrix_bits(const Matrix& m);

struct Detection {
    std::string payload;
    double center_x = 0.0;
    double center_y = 0.0;
    int version = 0;
};

struct DetectOptions {
    double gray_threshold = 127.5;  // pixels below are dark modules
    int max_decode_attempts = 64;   // cap on finder-triple candidates tried
};

/// Locate finder patterns in a gray image (0..255) and decode every distinct
/// symbol found. Orientation is recovered from the finder geometry; the image
/// is assumed not to be mirrored.
std::vector<Detection> detect_and_decode(const PlaneF& gray, const DetectOptions& opt = {});

}  // namespace lumalink::qr
