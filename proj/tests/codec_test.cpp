#include <gtest/gtest.h>

#include <vector>

#include "htq/codec.hpp"
#include "htq/rng.hpp"

using namespace htq;

TEST(BitCodec, WorkedExample) {
    std::vector<uint16_t> idx{7, 0, 5};
    auto bytes = encode_bits(idx, 3);
    ASSERT_EQ(bytes.size(), 2u);
    EXPECT_EQ(bytes[0], 0x47);
    EXPECT_EQ(bytes[1], 0x01);
    EXPECT_EQ(decode_bits(bytes, 3, 3), idx);
}

TEST(BitCodec, FullByte) {
    auto bytes = encode_bits(std::vector<uint16_t>{255}, 8);
    ASSERT_EQ(bytes.size(), 1u);
    EXPECT_EQ(bytes[0], 0xff);
}

TEST(BitCodec, EmptyInput) {
    auto bytes = encode_bits(std::vector<uint16_t>{}, 5);
    EXPECT_TRUE(bytes.empty());
    EXPECT_TRUE(decode_bits(bytes, 5, 0).empty());
}

TEST(BitCodec, RoundTripAllWidths) {
    Rng rng(9, "codec-prop");
    for (int trial = 0; trial < 2000; ++trial) {
        int b = trial % 8 + 1;
        size_t len = rng.bits() % 200;
        std::vector<uint16_t> idx(len);
        for (auto& v : idx) v = static_cast<uint16_t>(rng.bits() & ((1u << b) - 1));
        auto bytes = encode_bits(idx, b);
        EXPECT_EQ(bytes.size(), packed_size(len, b));
        EXPECT_EQ(decode_bits(bytes, b, len), idx);
    }
}

TEST(BitCodec, Errors) {
    std::vector<uint16_t> idx{8};
    try {
        encode_bits(idx, 3);
        FAIL();
    } catch (const HtqError& e) {
        EXPECT_EQ(e.kind(), ErrKind::IndexTooLarge);
    }
    std::vector<uint8_t> bytes{0x01};
    try {
        decode_bits(bytes, 3, 10);
        FAIL();
    } catch (const HtqError& e) {
        EXPECT_EQ(e.kind(), ErrKind::TruncatedPayload);
    }
    EXPECT_THROW(encode_bits(idx, 0), HtqError);
    EXPECT_THROW(encode_bits(idx, 9), HtqError);
}

TEST(Message, RoundTrip) {
    QuantizedMessage msg;
    msg.scheme = Scheme::TqUniform;
    msg.bits = 3;
    msg.alpha = 0.125f;
    msg.dim = 5;
    msg.payload = encode_bits(std::vector<uint16_t>{1, 2, 3, 4, 5}, 3);
    auto bytes = msg.serialize();
    EXPECT_EQ(bytes.size(), 16u + packed_size(5, 3));
    EXPECT_EQ(msg.byte_size(), bytes.size());

    auto parsed = QuantizedMessage::deserialize(bytes);
    EXPECT_EQ(parsed.scheme, Scheme::TqUniform);
    EXPECT_EQ(parsed.bits, 3);
    EXPECT_EQ(parsed.alpha, 0.125f);
    EXPECT_EQ(parsed.dim, 5u);
    EXPECT_EQ(parsed.payload, msg.payload);
}

TEST(Message, BiscaledHeaderCarriesSplit) {
    QuantizedMessage msg;
    msg.scheme = Scheme::Tbq;
    msg.bits = 3;
    msg.alpha = 1.0f;
    msg.dim = 3;
    msg.k = 0.25f;
    msg.s_alpha = 4;
    msg.s_beta = 3;
    msg.payload = encode_bits(std::vector<uint16_t>{0, 3, 7}, 3);
    auto bytes = msg.serialize();
    EXPECT_EQ(bytes.size(), 24u + packed_size(3, 3));

    auto parsed = QuantizedMessage::deserialize(bytes);
    EXPECT_EQ(parsed.k, 0.25f);
    EXPECT_EQ(parsed.s_alpha, 4);
    EXPECT_EQ(parsed.s_beta, 3);
}

TEST(Message, WireLayoutIsExact) {
    QuantizedMessage msg;
    msg.scheme = Scheme::Qsgd;
    msg.bits = 8;
    msg.alpha = 1.0f;
    msg.dim = 1;
    msg.payload = {0xAB};
    auto bytes = msg.serialize();
    ASSERT_EQ(bytes.size(), 17u);
    EXPECT_EQ(bytes[0], 'H');
    EXPECT_EQ(bytes[1], 'T');
    EXPECT_EQ(bytes[2], 'Q');
    EXPECT_EQ(bytes[3], '1');
    EXPECT_EQ(bytes[4], 3);  // scheme id
    EXPECT_EQ(bytes[5], 8);  // bits
    EXPECT_EQ(bytes[6], 0);  // reserved
    EXPECT_EQ(bytes[7], 0);
    // alpha = 1.0f -> 0x3f800000 little-endian
    EXPECT_EQ(bytes[8], 0x00);
    EXPECT_EQ(bytes[9], 0x00);
    EXPECT_EQ(bytes[10], 0x80);
    EXPECT_EQ(bytes[11], 0x3f);
    // dim = 1
    EXPECT_EQ(bytes[12], 1);
    EXPECT_EQ(bytes[13], 0);
    EXPECT_EQ(bytes[14], 0);
    EXPECT_EQ(bytes[15], 0);
    EXPECT_EQ(bytes[16], 0xAB);
}

TEST(Message, CorruptionDetected) {
    QuantizedMessage msg;
    msg.scheme = Scheme::TqUniform;
    msg.bits = 2;
    msg.alpha = 1.0f;
    msg.dim = 4;
    msg.payload = encode_bits(std::vector<uint16_t>{0, 1, 2, 3}, 2);
    auto bytes = msg.serialize();

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(QuantizedMessage::deserialize(bad_magic), HtqError);

    auto bad_scheme = bytes;
    bad_scheme[4] = 9;
    EXPECT_THROW(QuantizedMessage::deserialize(bad_scheme), HtqError);

    auto short_payload = bytes;
    short_payload.pop_back();
    try {
        QuantizedMessage::deserialize(short_payload);
        FAIL();
    } catch (const HtqError& e) {
        EXPECT_EQ(e.kind(), ErrKind::TruncatedPayload);
    }
}
