#include "lumalink/qr.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace lumalink::qr {

namespace {

// ---------------------------------------------------------------------------
// GF(256) arithmetic, polynomial 0x11D, generator 2.
// ---------------------------------------------------------------------------

struct Gf256 {
    std::array<std::uint8_t, 512> exp{};
    std::array<int, 256> log{};

    Gf256() {
        int x = 1;
        for (int i = 0; i < 255; ++i) {
            exp[i] = static_cast<std::uint8_t>(x);
            log[x] = i;
            x <<= 1;
            if (x & 0x100) x ^= 0x11D;
        }
        for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
        log[0] = -1;
    }

    std::uint8_t mul(std::uint8_t a, std::uint8_t b) const {
        if (a == 0 || b == 0) return 0;
        return exp[log[a] + log[b]];
    }
    std::uint8_t div(std::uint8_t a, std::uint8_t b) const {
        if (b == 0) throw std::domain_error("gf256: division by zero");
        if (a == 0) return 0;
        return exp[(log[a] - log[b] + 255) % 255];
    }
    std::uint8_t pow(int e) const { return exp[((e % 255) + 255) % 255]; }
    std::uint8_t inv(std::uint8_t a) const { return div(1, a); }
};

const Gf256& gf() {
    static const Gf256 tables;
    return tables;
}

using Poly = std::vector<std::uint8_t>;  // poly[0] = highest-degree coefficient

Poly rs_generator(int ecc) {
    Poly g{1};
    for (int i = 0; i < ecc; ++i) {
        Poly next(g.size() + 1, 0);
        const std::uint8_t root = gf().pow(i);
        for (std::size_t j = 0; j < g.size(); ++j) {
            next[j] ^= g[j];
            next[j + 1] ^= gf().mul(g[j], root);
        }
        g = std::move(next);
    }
    return g;
}

std::vector<std::uint8_t> rs_compute_ecc(const std::vector<std::uint8_t>& data, int ecc) {
    const Poly g = rs_generator(ecc);
    std::vector<std::uint8_t> rem(ecc, 0);
    for (std::uint8_t byte : data) {
        const std::uint8_t factor = byte ^ rem.front();
        rem.erase(rem.begin());
        rem.push_back(0);
        for (int i = 0; i < ecc; ++i) rem[i] = rem[i] ^ gf().mul(g[i + 1], factor);
    }
    return rem;
}

std::uint8_t poly_eval(const std::vector<std::uint8_t>& p, std::uint8_t x) {
    std::uint8_t acc = 0;
    for (std::uint8_t c : p) acc = gf().mul(acc, x) ^ c;
    return acc;
}

// Correct up to floor(ecc/2) byte errors in place. Returns false when the
// codeword is unrecoverable.
bool rs_correct(std::vector<std::uint8_t>& cw, int ecc) {
    const int n = static_cast<int>(cw.size());
    std::vector<std::uint8_t> synd(ecc);
    bool clean = true;
    for (int i = 0; i < ecc; ++i) {
        synd[i] = poly_eval(cw, gf().pow(i));
        clean = clean && synd[i] == 0;
    }
    if (clean) return true;

    // Berlekamp-Massey: error locator sigma, ascending coefficient order.
    std::vector<std::uint8_t> sigma{1}, prev{1};
    int errors = 0, m = 1;
    std::uint8_t b = 1;
    for (int step = 0; step < ecc; ++step) {
        std::uint8_t delta = synd[step];
        for (int i = 1; i <= errors; ++i) {
            if (i < static_cast<int>(sigma.size())) delta ^= gf().mul(sigma[i], synd[step - i]);
        }
        if (delta == 0) {
            ++m;
            continue;
        }
        if (2 * errors <= step) {
            std::vector<std::uint8_t> saved = sigma;
            const std::uint8_t scale = gf().div(delta, b);
            if (sigma.size() < prev.size() + m) sigma.resize(prev.size() + m, 0);
            for (std::size_t i = 0; i < prev.size(); ++i) {
                sigma[i + m] ^= gf().mul(prev[i], scale);
            }
            errors = step + 1 - errors;
            prev = std::move(saved);
            b = delta;
            m = 1;
        } else {
            const std::uint8_t scale = gf().div(delta, b);
            if (sigma.size() < prev.size() + m) sigma.resize(prev.size() + m, 0);
            for (std::size_t i = 0; i < prev.size(); ++i) {
                sigma[i + m] ^= gf().mul(prev[i], scale);
            }
            ++m;
        }
    }
    while (!sigma.empty() && sigma.back() == 0) sigma.pop_back();
    const int deg = static_cast<int>(sigma.size()) - 1;
    if (deg <= 0 || deg > ecc / 2) return false;

    // Chien search over valid positions.
    std::vector<int> positions;  // indices into cw
    for (int k = 0; k < n; ++k) {
        const int p = n - 1 - k;  // power of the term cw[k] multiplies
        std::uint8_t acc = 0;
        const std::uint8_t xinv = gf().pow(-p);
        for (int i = deg; i >= 0; --i) acc = gf().mul(acc, xinv) ^ sigma[i];
        if (acc == 0) positions.push_back(k);
    }
    if (static_cast<int>(positions.size()) != deg) return false;

    // Forney: omega = (synd * sigma) mod x^ecc, ascending orders everywhere.
    std::vector<std::uint8_t> omega(ecc, 0);
    for (int i = 0; i < ecc; ++i) {
        for (std::size_t j = 0; j < sigma.size(); ++j) {
            if (i + static_cast<int>(j) >= ecc) break;
            omega[i + j] ^= gf().mul(synd[i], sigma[j]);
        }
    }
    for (int k : positions) {
        const int p = n - 1 - k;
        const std::uint8_t xinv = gf().pow(-p);
        std::uint8_t om = 0;
        for (int i = static_cast<int>(omega.size()) - 1; i >= 0; --i) {
            om = gf().mul(om, xinv) ^ omega[i];
        }
        std::uint8_t dsig = 0;  // sigma'(xinv); even-power terms vanish in GF(2^m)
        for (std::size_t i = 1; i < sigma.size(); i += 2) {
            std::uint8_t term = sigma[i];
            for (std::size_t e = 0; e + 1 < i; ++e) term = gf().mul(term, xinv);
            dsig ^= term;
        }
        if (dsig == 0) return false;
        const std::uint8_t magnitude = gf().mul(gf().pow(p), gf().div(om, dsig));
        cw[k] ^= magnitude;
    }
    for (int i = 0; i < ecc; ++i) {
        if (poly_eval(cw, gf().pow(i)) != 0) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Symbol tables, versions 1..10.
// ---------------------------------------------------------------------------

struct BlockGroup {
    int blocks;
    int data_len;
};

struct EcEntry {
    int ec_per_block;
    BlockGroup g1;
    BlockGroup g2;  // blocks == 0 when absent
};

// Indexed [version-1][level] with level order L, M, Q, H.
constexpr EcEntry kEcTable[10][4] = {
    {{7, {1, 19}, {0, 0}}, {10, {1, 16}, {0, 0}}, {13, {1, 13}, {0, 0}}, {17, {1, 9}, {0, 0}}},
    {{10, {1, 34}, {0, 0}}, {16, {1, 28}, {0, 0}}, {22, {1, 22}, {0, 0}}, {28, {1, 16}, {0, 0}}},
    {{15, {1, 55}, {0, 0}}, {26, {1, 44}, {0, 0}}, {18, {2, 17}, {0, 0}}, {22, {2, 13}, {0, 0}}},
    {{20, {1, 80}, {0, 0}}, {18, {2, 32}, {0, 0}}, {26, {2, 24}, {0, 0}}, {16, {4, 9}, {0, 0}}},
    {{26, {1, 108}, {0, 0}}, {24, {2, 43}, {0, 0}}, {18, {2, 15}, {2, 16}}, {22, {2, 11}, {2, 12}}},
    {{18, {2, 68}, {0, 0}}, {16, {4, 27}, {0, 0}}, {24, {4, 19}, {0, 0}}, {28, {4, 15}, {0, 0}}},
    {{20, {2, 78}, {0, 0}}, {18, {4, 31}, {0, 0}}, {18, {2, 14}, {4, 15}}, {26, {4, 13}, {1, 14}}},
    {{24, {2, 97}, {0, 0}}, {22, {2, 38}, {2, 39}}, {22, {4, 18}, {2, 19}}, {26, {4, 14}, {2, 15}}},
    {{30, {2, 116}, {0, 0}}, {22, {3, 36}, {2, 37}}, {20, {4, 16}, {4, 17}}, {24, {4, 12}, {4, 13}}},
    {{18, {2, 68}, {2, 69}}, {26, {4, 43}, {1, 44}}, {24, {6, 19}, {2, 20}}, {28, {6, 15}, {2, 16}}},
};

constexpr int kMaxVersion = 10;

const std::vector<int>& alignment_centers(int version) {
    static const std::array<std::vector<int>, 11> table = {
        std::vector<int>{},        {},          {6, 18},     {6, 22},
        std::vector<int>{6, 26},   {6, 30},     {6, 34},     {6, 22, 38},
        std::vector<int>{6, 24, 42}, {6, 26, 46}, {6, 28, 50}};
    return table[version];
}

const EcEntry& ec_entry(int version, EcLevel ec) {
    if (version < 1 || version > kMaxVersion) throw std::invalid_argument("qr: unsupported version");
    return kEcTable[version - 1][static_cast<int>(ec)];
}

int char_count_bits(int version) { return version <= 9 ? 8 : 16; }

int byte_capacity(int version, EcLevel ec) {
    const EcEntry& e = ec_entry(version, ec);
    const int data_cw = e.g1.blocks * e.g1.data_len + e.g2.blocks * e.g2.data_len;
    return (data_cw * 8 - 4 - char_count_bits(version)) / 8;
}

// ---------------------------------------------------------------------------
// Bit stream helpers.
// ---------------------------------------------------------------------------

struct BitWriter {
    std::vector<std::uint8_t> bits;
    void append(std::uint32_t value, int count) {
        for (int i = count - 1; i >= 0; --i) bits.push_back((value >> i) & 1);
    }
};

struct BitReader {
    const std::vector<std::uint8_t>* bits;
    std::size_t pos = 0;
    std::size_t remaining() const { return bits->size() - pos; }
    std::uint32_t take(int count) {
        std::uint32_t v = 0;
        for (int i = 0; i < count; ++i) v = (v << 1) | (*bits)[pos++];
        return v;
    }
};

// ---------------------------------------------------------------------------
// Matrix layout.
// ---------------------------------------------------------------------------

struct Layout {
    int side;
    Matrix function;  // 1 where the module is reserved for function patterns
    Matrix pattern;   // function-pattern module colors

    explicit Layout(int version) {
        side = 17 + 4 * version;
        function = Matrix::Zero(side, side);
        pattern = Matrix::Zero(side, side);
        place_finder(0, 0);
        place_finder(0, side - 7);
        place_finder(side - 7, 0);
        // Timing patterns.
        for (int i = 8; i < side - 8; ++i) {
            set_function(6, i, i % 2 == 0);
            set_function(i, 6, i % 2 == 0);
        }
        // Alignment patterns.
        const auto& centers = alignment_centers(version);
        for (int r : centers) {
            for (int c : centers) {
                const bool near_tl = r <= 8 && c <= 8;
                const bool near_tr = r <= 8 && c >= side - 9;
                const bool near_bl = r >= side - 9 && c <= 8;
                if (near_tl || near_tr || near_bl) continue;
                place_alignment(r, c);
            }
        }
        // Format information areas (contents written later).
        for (int i = 0; i <= 8; ++i) {
            if (i != 6) {
                reserve(8, i);
                reserve(i, 8);
            }
        }
        reserve(8, 8);
        for (int i = 0; i < 8; ++i) reserve(8, side - 1 - i);
        for (int i = 0; i < 7; ++i) reserve(side - 1 - i, 8);
        // Dark module.
        set_function(side - 8, 8, true);
        // Version information (v >= 7).
        if (version >= 7) {
            for (int k = 0; k < 18; ++k) {
                reserve(side - 11 + k % 3, k / 3);
                reserve(k / 3, side - 11 + k % 3);
            }
        }
    }

    void set_function(int r, int c, bool dark) {
        function(r, c) = 1;
        pattern(r, c) = dark ? 1 : 0;
    }
    void reserve(int r, int c) { function(r, c) = 1; }

    void place_finder(int r0, int c0) {
        for (int r = -1; r <= 7; ++r) {
            for (int c = -1; c <= 7; ++c) {
                const int rr = r0 + r;
                const int cc = c0 + c;
                if (rr < 0 || rr >= side || cc < 0 || cc >= side) continue;
                const int d = std::max(std::abs(r - 3), std::abs(c - 3));
                set_function(rr, cc, d <= 1 || d == 3);
            }
        }
    }

    void place_alignment(int rc, int cc) {
        for (int r = -2; r <= 2; ++r) {
            for (int c = -2; c <= 2; ++c) {
                const int d = std::max(std::abs(r), std::abs(c));
                set_function(rc + r, cc + c, d != 1);
            }
        }
    }

    std::vector<std::pair<int, int>> data_order() const {
        std::vector<std::pair<int, int>> order;
        order.reserve(static_cast<std::size_t>(side) * side);
        bool upward = true;
        int col = side - 1;
        while (col > 0) {
            if (col == 6) --col;
            for (int i = 0; i < side; ++i) {
                const int row = upward ? side - 1 - i : i;
                for (int dc = 0; dc < 2; ++dc) {
                    const int c = col - dc;
                    if (!function(row, c)) order.emplace_back(row, c);
                }
            }
            upward = !upward;
            col -= 2;
        }
        return order;
    }
};

bool mask_bit(int mask, int r, int c) {
    switch (mask) {
        case 0: return (r + c) % 2 == 0;
        case 1: return r % 2 == 0;
        case 2: return c % 3 == 0;
        case 3: return (r + c) % 3 == 0;
        case 4: return (r / 2 + c / 3) % 2 == 0;
        case 5: return (r * c) % 2 + (r * c) % 3 == 0;
        case 6: return ((r * c) % 2 + (r * c) % 3) % 2 == 0;
        default: return ((r + c) % 2 + (r * c) % 3) % 2 == 0;
    }
}

std::uint32_t bch_remainder(std::uint32_t value, std::uint32_t poly, int poly_deg, int shift) {
    std::uint32_t rem = value << shift;
    for (int i = 31 - poly_deg; i >= 0; --i) {
        if (rem & (1u << (i + poly_deg))) rem ^= poly << i;
    }
    return rem;
}

int format_ec_bits(EcLevel ec) {
    switch (ec) {
        case EcLevel::L: return 1;
        case EcLevel::M: return 0;
        case EcLevel::Q: return 3;
        default: return 2;
    }
}

std::uint32_t format_info_value(EcLevel ec, int mask) {
    const std::uint32_t data = static_cast<std::uint32_t>(format_ec_bits(ec) << 3 | mask);
    return ((data << 10) | bch_remainder(data, 0x537, 10, 10)) ^ 0x5412;
}

std::uint32_t version_info_value(int version) {
    const std::uint32_t v = static_cast<std::uint32_t>(version);
    return (v << 12) | bch_remainder(v, 0x1F25, 12, 12);
}

// Coordinates of format bit i (0 = LSB) for both copies.
std::pair<int, int> format_pos_copy1(int i) {
    if (i <= 5) return {8, i};
    if (i == 6) return {8, 7};
    if (i == 7) return {8, 8};
    if (i == 8) return {7, 8};
    return {14 - i, 8};
}

std::pair<int, int> format_pos_copy2(int i, int side) {
    if (i <= 6) return {side - 1 - i, 8};
    return {8, side - 15 + i};
}

void write_format_info(Matrix& m, EcLevel ec, int mask) {
    const std::uint32_t f = format_info_value(ec, mask);
    const int side = static_cast<int>(m.rows());
    // Bit 14 (MSB) goes first along each position sequence.
    for (int i = 0; i < 15; ++i) {
        const int bit = (f >> (14 - i)) & 1;
        auto [r1, c1] = format_pos_copy1(i);
        auto [r2, c2] = format_pos_copy2(i, side);
        m(r1, c1) = static_cast<std::uint8_t>(bit);
        m(r2, c2) = static_cast<std::uint8_t>(bit);
    }
}

int penalty_score(const Matrix& m) {
    const int side = static_cast<int>(m.rows());
    int score = 0;
    // Rule 1: runs of 5+ in rows and columns.
    for (int axis = 0; axis < 2; ++axis) {
        for (int a = 0; a < side; ++a) {
            int run = 1;
            for (int b = 1; b < side; ++b) {
                const std::uint8_t cur = axis == 0 ? m(a, b) : m(b, a);
                const std::uint8_t prv = axis == 0 ? m(a, b - 1) : m(b - 1, a);
                if (cur == prv) {
                    if (++run == 5) score += 3;
                    else if (run > 5) ++score;
                } else {
                    run = 1;
                }
            }
        }
    }
    // Rule 2: 2x2 blocks of one color.
    for (int r = 0; r + 1 < side; ++r) {
        for (int c = 0; c + 1 < side; ++c) {
            const std::uint8_t v = m(r, c);
            if (m(r, c + 1) == v && m(r + 1, c) == v && m(r + 1, c + 1) == v) score += 3;
        }
    }
    // Rule 3: finder-like 1:1:3:1:1 with 4 light modules on one side.
    static const std::array<std::uint8_t, 11> patA = {1, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0};
    static const std::array<std::uint8_t, 11> patB = {0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1};
    for (int axis = 0; axis < 2; ++axis) {
        for (int a = 0; a < side; ++a) {
            for (int b = 0; b + 11 <= side; ++b) {
                bool mA = true, mB = true;
                for (int i = 0; i < 11; ++i) {
                    const std::uint8_t v = axis == 0 ? m(a, b + i) : m(b + i, a);
                    mA = mA && v == patA[i];
                    mB = mB && v == patB[i];
                }
                if (mA) score += 40;
                if (mB) score += 40;
            }
        }
    }
    // Rule 4: dark-module proportion, scored against the two nearest
    // multiples of five.
    const long dark = static_cast<long>(m.template cast<long>().sum());
    const long total = static_cast<long>(side) * side;
    const int percent = static_cast<int>(dark * 100 / total);
    const int prev5 = percent / 5 * 5;
    score += std::min(std::abs(prev5 - 50), std::abs(prev5 + 5 - 50)) / 5 * 10;
    return score;
}

struct BlockSpec {
    std::vector<int> data_lens;
    int ec_per_block;
};

BlockSpec block_spec(int version, EcLevel ec) {
    const EcEntry& e = ec_entry(version, ec);
    BlockSpec s;
    s.ec_per_block = e.ec_per_block;
    for (int i = 0; i < e.g1.blocks; ++i) s.data_lens.push_back(e.g1.data_len);
    for (int i = 0; i < e.g2.blocks; ++i) s.data_lens.push_back(e.g2.data_len);
    return s;
}

std::vector<std::uint8_t> interleave_codewords(const std::vector<std::vector<std::uint8_t>>& data_blocks,
                                               const std::vector<std::vector<std::uint8_t>>& ec_blocks) {
    std::vector<std::uint8_t> out;
    std::size_t max_data = 0;
    for (const auto& b : data_blocks) max_data = std::max(max_data, b.size());
    for (std::size_t i = 0; i < max_data; ++i) {
        for (const auto& b : data_blocks) {
            if (i < b.size()) out.push_back(b[i]);
        }
    }
    for (std::size_t i = 0; i < ec_blocks.front().size(); ++i) {
        for (const auto& b : ec_blocks) out.push_back(b[i]);
    }
    return out;
}

}  // namespace

double ec_recovery_rate(EcLevel ec) {
    switch (ec) {
        case EcLevel::L: return 0.07;
        case EcLevel::M: return 0.15;
        case EcLevel::Q: return 0.25;
        default: return 0.30;
    }
}

SymbolInfo symbol_info(int version, EcLevel ec) {
    const EcEntry& e = ec_entry(version, ec);
    SymbolInfo info;
    info.version = version;
    info.side = 17 + 4 * version;
    info.data_codewords = e.g1.blocks * e.g1.data_len + e.g2.blocks * e.g2.data_len;
    info.block_count = e.g1.blocks + e.g2.blocks;
    info.ec_per_block = e.ec_per_block;
    info.total_codewords = info.data_codewords + info.block_count * e.ec_per_block;
    info.correctable_per_block = e.ec_per_block / 2;
    return info;
}

int smallest_version(std::size_t payload_bytes, EcLevel ec) {
    for (int v = 1; v <= kMaxVersion; ++v) {
        if (byte_capacity(v, ec) >= static_cast<int>(payload_bytes)) return v;
    }
    throw std::length_error("qr: payload too large for supported versions");
}

Matrix encode_bytes(const std::string& payload, EcLevel ec) {
    const int version = smallest_version(payload.size(), ec);
    const BlockSpec spec = block_spec(version, ec);
    const int data_cw =
        std::accumulate(spec.data_lens.begin(), spec.data_lens.end(), 0, std::plus<int>());

    BitWriter bw;
    bw.append(0b0100, 4);
    bw.append(static_cast<std::uint32_t>(payload.size()), char_count_bits(version));
    for (unsigned char ch : payload) bw.append(ch, 8);
    const int capacity_bits = data_cw * 8;
    const int terminator = std::min<int>(4, capacity_bits - static_cast<int>(bw.bits.size()));
    bw.append(0, terminator);
    while (bw.bits.size() % 8 != 0) bw.bits.push_back(0);

    std::vector<std::uint8_t> data;
    for (std::size_t i = 0; i < bw.bits.size(); i += 8) {
        std::uint8_t byte = 0;
        for (int b = 0; b < 8; ++b) byte = static_cast<std::uint8_t>(byte << 1 | bw.bits[i + b]);
        data.push_back(byte);
    }
    const std::array<std::uint8_t, 2> pad = {0xEC, 0x11};
    for (std::size_t i = 0; data.size() < static_cast<std::size_t>(data_cw); ++i) {
        data.push_back(pad[i % 2]);
    }

    std::vector<std::vector<std::uint8_t>> data_blocks, ec_blocks;
    std::size_t offset = 0;
    for (int len : spec.data_lens) {
        data_blocks.emplace_back(data.begin() + offset, data.begin() + offset + len);
        ec_blocks.push_back(rs_compute_ecc(data_blocks.back(), spec.ec_per_block));
        offset += len;
    }
    const std::vector<std::uint8_t> stream = interleave_codewords(data_blocks, ec_blocks);

    const Layout layout(version);
    const auto order = layout.data_order();
    std::vector<std::uint8_t> bits;
    bits.reserve(order.size());
    for (std::uint8_t byte : stream) {
        for (int b = 7; b >= 0; --b) bits.push_back((byte >> b) & 1);
    }
    bits.resize(order.size(), 0);  // remainder bits

    Matrix best;
    int best_score = -1;
    for (int mask = 0; mask < 8; ++mask) {
        Matrix m = layout.pattern;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto [r, c] = order[i];
            const std::uint8_t v = bits[i] ^ (mask_bit(mask, r, c) ? 1 : 0);
            m(r, c) = v;
        }
        write_format_info(m, ec, mask);
        if (version >= 7) {
            const std::uint32_t vi = version_info_value(version);
            const int side = layout.side;
            for (int k = 0; k < 18; ++k) {
                const std::uint8_t bit = (vi >> k) & 1;
                m(side - 11 + k % 3, k / 3) = bit;
                m(k / 3, side - 11 + k % 3) = bit;
            }
        }
        const int score = penalty_score(m);
        if (best_score < 0 || score < best_score) {
            best_score = score;
            best = std::move(m);
        }
    }
    return best;
}

namespace {

std::optional<std::pair<EcLevel, int>> read_format(const Matrix& m) {
    const int side = static_cast<int>(m.rows());
    std::uint32_t raw1 = 0, raw2 = 0;
    for (int i = 0; i < 15; ++i) {
        auto [r1, c1] = format_pos_copy1(i);
        auto [r2, c2] = format_pos_copy2(i, side);
        raw1 |= static_cast<std::uint32_t>(m(r1, c1) & 1) << (14 - i);
        raw2 |= static_cast<std::uint32_t>(m(r2, c2) & 1) << (14 - i);
    }
    int best_dist = 4;
    int best_data = -1;
    for (int data = 0; data < 32; ++data) {
        const std::uint32_t enc =
            ((static_cast<std::uint32_t>(data) << 10) | bch_remainder(data, 0x537, 10, 10)) ^ 0x5412;
        for (std::uint32_t raw : {raw1, raw2}) {
            const int dist = std::popcount(raw ^ enc);
            if (dist < best_dist) {
                best_dist = dist;
                best_data = data;
            }
        }
    }
    if (best_data < 0) return std::nullopt;
    const int ec_bits = best_data >> 3;
    const int mask = best_data & 7;
    EcLevel ec;
    switch (ec_bits) {
        case 1: ec = EcLevel::L; break;
        case 0: ec = EcLevel::M; break;
        case 3: ec = EcLevel::Q; break;
        default: ec = EcLevel::H; break;
    }
    return std::make_pair(ec, mask);
}

std::optional<std::string> parse_data_stream(const std::vector<std::uint8_t>& bytes, int version) {
    std::vector<std::uint8_t> bits;
    bits.reserve(bytes.size() * 8);
    for (std::uint8_t byte : bytes) {
        for (int b = 7; b >= 0; --b) bits.push_back((byte >> b) & 1);
    }
    BitReader br{&bits};
    std::string out;
    static const char* alnum = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ $%*+-./:";
    while (br.remaining() >= 4) {
        const std::uint32_t mode = br.take(4);
        if (mode == 0) break;  // terminator
        if (mode == 0b0100) {  // byte
            const int cb = char_count_bits(version);
            if (br.remaining() < static_cast<std::size_t>(cb)) return std::nullopt;
            const std::uint32_t count = br.take(cb);
            if (br.remaining() < 8u * count) return std::nullopt;
            for (std::uint32_t i = 0; i < count; ++i) out.push_back(static_cast<char>(br.take(8)));
        } else if (mode == 0b0001) {  // numeric
            const int cb = version <= 9 ? 10 : 12;
            if (br.remaining() < static_cast<std::size_t>(cb)) return std::nullopt;
            std::uint32_t count = br.take(cb);
            while (count >= 3) {
                if (br.remaining() < 10) return std::nullopt;
                const std::uint32_t v = br.take(10);
                if (v > 999) return std::nullopt;
                out += static_cast<char>('0' + v / 100);
                out += static_cast<char>('0' + v / 10 % 10);
                out += static_cast<char>('0' + v % 10);
                count -= 3;
            }
            if (count == 2) {
                if (br.remaining() < 7) return std::nullopt;
                const std::uint32_t v = br.take(7);
                if (v > 99) return std::nullopt;
                out += static_cast<char>('0' + v / 10);
                out += static_cast<char>('0' + v % 10);
            } else if (count == 1) {
                if (br.remaining() < 4) return std::nullopt;
                const std::uint32_t v = br.take(4);
                if (v > 9) return std::nullopt;
                out += static_cast<char>('0' + v);
            }
        } else if (mode == 0b0010) {  // alphanumeric
            const int cb = version <= 9 ? 9 : 11;
            if (br.remaining() < static_cast<std::size_t>(cb)) return std::nullopt;
            std::uint32_t count = br.take(cb);
            while (count >= 2) {
                if (br.remaining() < 11) return std::nullopt;
                const std::uint32_t v = br.take(11);
                if (v >= 45 * 45) return std::nullopt;
                out += alnum[v / 45];
                out += alnum[v % 45];
                count -= 2;
            }
            if (count == 1) {
                if (br.remaining() < 6) return std::nullopt;
                const std::uint32_t v = br.take(6);
                if (v >= 45) return std::nullopt;
                out += alnum[v];
            }
        } else if (mode == 0b0111) {  // ECI designator: skip
            if (br.remaining() < 8) return std::nullopt;
            std::uint32_t first = br.take(8);
            int extra = 0;
            if ((first & 0x80) == 0) extra = 0;
            else if ((first & 0xC0) == 0x80) extra = 1;
            else extra = 2;
            if (br.remaining() < 8u * extra) return std::nullopt;
            for (int i = 0; i < extra; ++i) br.take(8);
        } else {
            return std::nullopt;  // unsupported mode
        }
    }
    return out;
}

}  // namespace

std::optional<std::string> decode_matrix_bits(const Matrix& m) {
    const int side = static_cast<int>(m.rows());
    if (side != static_cast<int>(m.cols()) || (side - 17) % 4 != 0) return std::nullopt;
    const int version = (side - 17) / 4;
    if (version < 1 || version > kMaxVersion) return std::nullopt;

    const auto fmt = read_format(m);
    if (!fmt) return std::nullopt;
    const auto [ec, mask] = *fmt;

    const Layout layout(version);
    const auto order = layout.data_order();
    std::vector<std::uint8_t> bits;
    bits.reserve(order.size());
    for (const auto& [r, c] : order) {
        bits.push_back(static_cast<std::uint8_t>((m(r, c) & 1) ^ (mask_bit(mask, r, c) ? 1 : 0)));
    }

    const BlockSpec spec = block_spec(version, ec);
    const int total_cw = symbol_info(version, ec).total_codewords;
    if (static_cast<int>(bits.size()) < total_cw * 8) return std::nullopt;
    std::vector<std::uint8_t> stream;
    stream.reserve(total_cw);
    for (int i = 0; i < total_cw; ++i) {
        std::uint8_t byte = 0;
        for (int b = 0; b < 8; ++b) byte = static_cast<std::uint8_t>(byte << 1 | bits[i * 8 + b]);
        stream.push_back(byte);
    }

    // De-interleave into blocks.
    const int nblocks = static_cast<int>(spec.data_lens.size());
    std::vector<std::vector<std::uint8_t>> blocks(nblocks);
    std::size_t max_data = 0;
    for (int len : spec.data_lens) max_data = std::max<std::size_t>(max_data, len);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < max_data; ++i) {
        for (int b = 0; b < nblocks; ++b) {
            if (i < static_cast<std::size_t>(spec.data_lens[b])) blocks[b].push_back(stream[pos++]);
        }
    }
    std::vector<std::vector<std::uint8_t>> ecc(nblocks);
    for (int i = 0; i < spec.ec_per_block; ++i) {
        for (int b = 0; b < nblocks; ++b) ecc[b].push_back(stream[pos++]);
    }

    std::vector<std::uint8_t> data;
    for (int b = 0; b < nblocks; ++b) {
        std::vector<std::uint8_t> cw = blocks[b];
        cw.insert(cw.end(), ecc[b].begin(), ecc[b].end());
        if (!rs_correct(cw, spec.ec_per_block)) return std::nullopt;
        data.insert(data.end(), cw.begin(), cw.begin() + spec.data_lens[b]);
    }
    return parse_data_stream(data, version);
}

// ---------------------------------------------------------------------------
// Image-level detection.
// ---------------------------------------------------------------------------

namespace {

struct FinderCandidate {
    double x = 0, y = 0;
    double module = 0;
    int hits = 0;
};

bool ratio_ok(const std::array<int, 5>& runs) {
    const int total = runs[0] + runs[1] + runs[2] + runs[3] + runs[4];
    if (total < 7) return false;
    const double m = total / 7.0;
    const double tol = std::max(0.65 * m, 0.8);
    return std::abs(runs[0] - m) <= tol && std::abs(runs[1] - m) <= tol &&
           std::abs(runs[2] - 3 * m) <= 2 * tol && std::abs(runs[3] - m) <= tol &&
           std::abs(runs[4] - m) <= tol;
}

// Vertical cross-check of a horizontal finder hit; refines the center row.
bool vertical_check(const Plane<std::uint8_t>& dark, int cx, int cy, double module, double* out_cy) {
    const int h = static_cast<int>(dark.rows());
    if (!dark(cy, cx)) return false;
    int top = cy, bot = cy;
    while (top > 0 && dark(top - 1, cx)) --top;
    while (bot + 1 < h && dark(bot + 1, cx)) ++bot;
    const int core = bot - top + 1;
    if (std::abs(core - 3 * module) > std::max(2.0 * module, 2.5)) return false;

    int wtop = top, wbot = bot;  // white runs
    while (wtop > 0 && !dark(wtop - 1, cx)) --wtop;
    while (wbot + 1 < h && !dark(wbot + 1, cx)) ++wbot;
    const int white_above = top - wtop;
    const int white_below = wbot - bot;
    const double tol = std::max(0.85 * module, 1.2);
    if (std::abs(white_above - module) > tol || std::abs(white_below - module) > tol) return false;

    int btop = wtop, bbot = wbot;  // outer dark runs
    while (btop > 0 && dark(btop - 1, cx)) --btop;
    while (bbot + 1 < h && dark(bbot + 1, cx)) ++bbot;
    if (std::abs((wtop - btop) - module) > tol || std::abs((bbot - wbot) - module) > tol) return false;

    *out_cy = 0.5 * (top + bot);
    return true;
}

std::vector<FinderCandidate> find_finder_patterns(const Plane<std::uint8_t>& dark) {
    const int h = static_cast<int>(dark.rows());
    const int w = static_cast<int>(dark.cols());
    std::vector<FinderCandidate> cands;

    for (int y = 0; y < h; ++y) {
        // Run-length encode the row.
        int x = 0;
        std::vector<std::pair<int, int>> runs;  // (start, len), alternating colors
        std::vector<std::uint8_t> colors;
        while (x < w) {
            const std::uint8_t c = dark(y, x);
            int start = x;
            while (x < w && dark(y, x) == c) ++x;
            runs.emplace_back(start, x - start);
            colors.push_back(c);
        }
        for (std::size_t i = 0; i + 5 <= runs.size(); ++i) {
            if (!colors[i]) continue;  // must start dark
            const std::array<int, 5> pat = {runs[i].second, runs[i + 1].second, runs[i + 2].second,
                                            runs[i + 3].second, runs[i + 4].second};
            if (!ratio_ok(pat)) continue;
            const double module = (pat[0] + pat[1] + pat[2] + pat[3] + pat[4]) / 7.0;
            // Pixel-index center: a run of len pixels starting at s is centered
            // on index s + (len-1)/2.
            const double cx = runs[i + 2].first + (pat[2] - 1) / 2.0;
            double cy = y;
            if (!vertical_check(dark, static_cast<int>(cx), y, module, &cy)) continue;

            bool merged = false;
            for (auto& c : cands) {
                if (std::abs(c.x - cx) <= std::max(2.0, c.module) &&
                    std::abs(c.y - cy) <= std::max(2.0, 2 * c.module)) {
                    c.x = (c.x * c.hits + cx) / (c.hits + 1);
                    c.y = (c.y * c.hits + cy) / (c.hits + 1);
                    c.module = (c.module * c.hits + module) / (c.hits + 1);
                    ++c.hits;
                    merged = true;
                    break;
                }
            }
            if (!merged) cands.push_back({cx, cy, module, 1});
        }
    }
    std::erase_if(cands, [](const FinderCandidate& c) { return c.hits < 2; });
    std::sort(cands.begin(), cands.end(),
              [](const FinderCandidate& a, const FinderCandidate& b) { return a.hits > b.hits; });
    if (cands.size() > 24) cands.resize(24);
    return cands;
}

struct TripleCandidate {
    int tl, tr, bl;
    double score;
};

}  // namespace

std::vector<Detection> detect_and_decode(const PlaneF& gray, const DetectOptions& opt) {
    const int h = static_cast<int>(gray.rows());
    const int w = static_cast<int>(gray.cols());
    std::vector<Detection> found;
    if (h < 21 || w < 21) return found;

    Plane<std::uint8_t> dark(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) dark(y, x) = gray(y, x) < opt.gray_threshold ? 1 : 0;
    }

    const auto cands = find_finder_patterns(dark);
    if (cands.size() < 3) return found;

    std::vector<TripleCandidate> triples;
    for (std::size_t a = 0; a < cands.size(); ++a) {
        for (std::size_t b = 0; b < cands.size(); ++b) {
            for (std::size_t c = b + 1; c < cands.size(); ++c) {
                if (a == b || a == c) continue;
                // a as top-left; b/c as the two arms in either order.
                const double v1x = cands[b].x - cands[a].x, v1y = cands[b].y - cands[a].y;
                const double v2x = cands[c].x - cands[a].x, v2y = cands[c].y - cands[a].y;
                const double l1 = std::hypot(v1x, v1y), l2 = std::hypot(v2x, v2y);
                if (l1 < 10 || l2 < 10) continue;
                if (std::abs(l1 - l2) > 0.2 * std::max(l1, l2)) continue;
                const double cosang = (v1x * v2x + v1y * v2y) / (l1 * l2);
                if (std::abs(cosang) > 0.25) continue;
                const double mod_avg = (cands[a].module + cands[b].module + cands[c].module) / 3.0;
                const double mod_spread =
                    std::max({cands[a].module, cands[b].module, cands[c].module}) -
                    std::min({cands[a].module, cands[b].module, cands[c].module});
                if (mod_spread > 0.6 * mod_avg) continue;
                const double cross = v1x * v2y - v1y * v2x;
                const int tr = cross > 0 ? static_cast<int>(b) : static_cast<int>(c);
                const int bl = cross > 0 ? static_cast<int>(c) : static_cast<int>(b);
                const double score = std::abs(cosang) + std::abs(l1 - l2) / std::max(l1, l2) +
                                     mod_spread / mod_avg;
                triples.push_back({static_cast<int>(a), tr, bl, score});
            }
        }
    }
    std::sort(triples.begin(), triples.end(),
              [](const TripleCandidate& x, const TripleCandidate& y) { return x.score < y.score; });

    int attempts = 0;
    for (const auto& t : triples) {
        if (attempts >= opt.max_decode_attempts) break;
        const auto& tl = cands[t.tl];
        const auto& tr = cands[t.tr];
        const auto& bl = cands[t.bl];
        const double mod = (tl.module + tr.module + bl.module) / 3.0;
        const double dist = std::hypot(tr.x - tl.x, tr.y - tl.y);
        const double side_est = dist / mod + 7.0;
        const int version = static_cast<int>(std::lround((side_est - 17.0) / 4.0));
        if (version < 1 || version > kMaxVersion) continue;
        const int side = 17 + 4 * version;
        ++attempts;

        const double span = side - 7;  // modules between finder centers
        const double exx = (tr.x - tl.x) / span, exy = (tr.y - tl.y) / span;
        const double eyx = (bl.x - tl.x) / span, eyy = (bl.y - tl.y) / span;

        Matrix m(side, side);
        for (int r = 0; r < side; ++r) {
            for (int c = 0; c < side; ++c) {
                // Module (r,c) is centered at (c+0.5, r+0.5) in module units;
                // the TL finder center sits at 3.5.
                const double mx = c - 3.0, my = r - 3.0;
                const double px = tl.x + exx * mx + eyx * my;
                const double py = tl.y + exy * mx + eyy * my;
                const float v = sample_bilinear_clamped(gray, px, py);
                m(r, c) = v < opt.gray_threshold ? 1 : 0;
            }
        }
        auto payload = decode_matrix_bits(m);
        if (!payload) continue;

        const double cx = tl.x + (exx + eyx) * span / 2.0;
        const double cy = tl.y + (exy + eyy) * span / 2.0;
        bool duplicate = false;
        for (const auto& d : found) {
            if (std::hypot(d.center_x - cx, d.center_y - cy) < 4.0 * mod) duplicate = true;
        }
        if (!duplicate) found.push_back({*payload, cx, cy, version});
    }
    return found;
}

}  // namespace lumalink::qr
