#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "htq/common.hpp"

namespace htq {

// Wire scheme ids (message header byte).
enum class Scheme : uint8_t {
    TqUniform = 0,   // truncated uniform
    Tnq = 1,         // truncated cube-root non-uniform
    Tbq = 2,         // truncated bi-scaled
    Qsgd = 3,        // uniform, alpha = max|g|, no truncation
    Nqsgd = 4,       // cube-root, alpha = max|g|, no truncation
};

inline size_t packed_size(size_t count, int bits) {
    return (count * static_cast<size_t>(bits) + 7) / 8;
}

// LSB-first packing: index i occupies bits [i*b, (i+1)*b) of the bit stream,
// least-significant bit of each index first, bytes filled low bit to high.
inline std::vector<uint8_t> encode_bits(std::span<const uint16_t> indices, int bits) {
    require(bits >= 1 && bits <= 8, ErrKind::OutOfRange, "bit width must be in [1, 8]");
    const uint32_t limit = 1u << bits;
    std::vector<uint8_t> out(packed_size(indices.size(), bits), 0);
    uint32_t acc = 0;
    int acc_bits = 0;
    size_t pos = 0;
    for (uint16_t idx : indices) {
        require(idx < limit, ErrKind::IndexTooLarge, "index does not fit in bit width");
        acc |= static_cast<uint32_t>(idx) << acc_bits;
        acc_bits += bits;
        while (acc_bits >= 8) {
            out[pos++] = static_cast<uint8_t>(acc & 0xff);
            acc >>= 8;
            acc_bits -= 8;
        }
    }
    if (acc_bits > 0) out[pos++] = static_cast<uint8_t>(acc & 0xff);
    return out;
}

inline std::vector<uint16_t> decode_bits(std::span<const uint8_t> bytes, int bits, size_t count) {
    require(bits >= 1 && bits <= 8, ErrKind::OutOfRange, "bit width must be in [1, 8]");
    require(bytes.size() >= packed_size(count, bits), ErrKind::TruncatedPayload,
            "payload shorter than packed size");
    const uint32_t mask = (1u << bits) - 1;
    std::vector<uint16_t> out(count);
    uint32_t acc = 0;
    int acc_bits = 0;
    size_t pos = 0;
    for (size_t i = 0; i < count; ++i) {
        while (acc_bits < bits) {
            acc |= static_cast<uint32_t>(bytes[pos++]) << acc_bits;
            acc_bits += 8;
        }
        out[i] = static_cast<uint16_t>(acc & mask);
        acc >>= bits;
        acc_bits -= bits;
    }
    return out;
}

// Wire unit for one quantized gradient (one parameter group of one client).
// Layout, little-endian:
//   "HTQ1" | scheme u8 | bits u8 | reserved u16 | alpha f32 | dim u32
//   | TBQ only: k f32, s_alpha u16, s_beta u16 | payload ceil(dim*bits/8)
struct QuantizedMessage {
    Scheme scheme = Scheme::TqUniform;
    uint8_t bits = 0;
    float alpha = 0.0f;
    uint32_t dim = 0;
    float k = 0.0f;          // biscaled only
    uint16_t s_alpha = 0;    // biscaled only
    uint16_t s_beta = 0;     // biscaled only
    std::vector<uint8_t> payload;

    size_t header_size() const { return scheme == Scheme::Tbq ? 24 : 16; }
    size_t byte_size() const { return header_size() + payload.size(); }

    std::vector<uint8_t> serialize() const {
        std::vector<uint8_t> out;
        out.reserve(byte_size());
        auto put_u8 = [&](uint8_t v) { out.push_back(v); };
        auto put_u16 = [&](uint16_t v) {
            out.push_back(static_cast<uint8_t>(v & 0xff));
            out.push_back(static_cast<uint8_t>(v >> 8));
        };
        auto put_u32 = [&](uint32_t v) {
            for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
        };
        auto put_f32 = [&](float v) {
            uint32_t b;
            std::memcpy(&b, &v, 4);
            put_u32(b);
        };
        out.push_back('H');
        out.push_back('T');
        out.push_back('Q');
        out.push_back('1');
        put_u8(static_cast<uint8_t>(scheme));
        put_u8(bits);
        put_u16(0);  // reserved
        put_f32(alpha);
        put_u32(dim);
        if (scheme == Scheme::Tbq) {
            put_f32(k);
            put_u16(s_alpha);
            put_u16(s_beta);
        }
        out.insert(out.end(), payload.begin(), payload.end());
        return out;
    }

    static QuantizedMessage deserialize(std::span<const uint8_t> bytes) {
        require(bytes.size() >= 16, ErrKind::CorruptMessage, "message shorter than header");
        require(bytes[0] == 'H' && bytes[1] == 'T' && bytes[2] == 'Q' && bytes[3] == '1',
                ErrKind::CorruptMessage, "bad magic");
        size_t pos = 4;
        auto get_u8 = [&] { return bytes[pos++]; };
        auto get_u16 = [&] {
            uint16_t v = static_cast<uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
            pos += 2;
            return v;
        };
        auto get_u32 = [&] {
            uint32_t v = 0;
            for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos + i]) << (8 * i);
            pos += 4;
            return v;
        };
        auto get_f32 = [&] {
            uint32_t b = get_u32();
            float v;
            std::memcpy(&v, &b, 4);
            return v;
        };
        QuantizedMessage msg;
        uint8_t scheme_id = get_u8();
        require(scheme_id <= 4, ErrKind::CorruptMessage, "unknown scheme id");
        msg.scheme = static_cast<Scheme>(scheme_id);
        msg.bits = get_u8();
        require(msg.bits >= 1 && msg.bits <= 8, ErrKind::CorruptMessage, "bad bit width");
        get_u16();  // reserved
        msg.alpha = get_f32();
        msg.dim = get_u32();
        if (msg.scheme == Scheme::Tbq) {
            require(bytes.size() >= 24, ErrKind::CorruptMessage, "message shorter than TBQ header");
            msg.k = get_f32();
            msg.s_alpha = get_u16();
            msg.s_beta = get_u16();
        }
        size_t need = packed_size(msg.dim, msg.bits);
        require(bytes.size() - pos >= need, ErrKind::TruncatedPayload, "payload truncated");
        msg.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                           bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
        return msg;
    }
};

}  // namespace htq
