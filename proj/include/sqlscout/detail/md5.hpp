#pragma once

// Self-contained RFC 1321 MD5 so the library carries no crypto dependency.
// Only used for content signatures and transcript digests, never security.

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace sqlscout::detail {

class Md5 {
public:
    Md5() { reset(); }

    void reset() {
        a0_ = 0x67452301u;
        b0_ = 0xefcdab89u;
        c0_ = 0x98badcfeu;
        d0_ = 0x10325476u;
        total_bytes_ = 0;
        buffered_ = 0;
    }

    void update(const void* data, std::size_t len) {
        total_bytes_ += len;
        absorb(static_cast<const std::uint8_t*>(data), len);
    }

    std::array<std::uint8_t, 16> finish() {
        const std::uint64_t bit_len = total_bytes_ * 8;
        std::uint8_t tail[72];
        std::size_t zeros = (119 - buffered_) % 64;
        std::size_t n = 0;
        tail[n++] = 0x80;
        for (std::size_t i = 0; i < zeros; ++i) tail[n++] = 0;
        for (int i = 0; i < 8; ++i) tail[n++] = static_cast<std::uint8_t>(bit_len >> (8 * i));
        absorb(tail, n);

        std::array<std::uint8_t, 16> out{};
        const std::uint32_t regs[4] = {a0_, b0_, c0_, d0_};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                out[4 * i + j] = static_cast<std::uint8_t>(regs[i] >> (8 * j));
        return out;
    }

    // One-shot digest of a byte string, lowercase hex.
    static std::string hex(std::string_view data) {
        Md5 h;
        h.update(data.data(), data.size());
        auto digest = h.finish();
        static const char* alphabet = "0123456789abcdef";
        std::string out(32, '0');
        for (int i = 0; i < 16; ++i) {
            out[2 * i] = alphabet[digest[i] >> 4];
            out[2 * i + 1] = alphabet[digest[i] & 0x0f];
        }
        return out;
    }

private:
    void absorb(const std::uint8_t* p, std::size_t len) {
        if (buffered_ > 0) {
            std::size_t take = std::min(len, std::size_t{64} - buffered_);
            std::memcpy(buffer_ + buffered_, p, take);
            buffered_ += take;
            p += take;
            len -= take;
            if (buffered_ == 64) {
                compress(buffer_);
                buffered_ = 0;
            }
        }
        while (len >= 64) {
            compress(p);
            p += 64;
            len -= 64;
        }
        if (len > 0) {
            std::memcpy(buffer_, p, len);
            buffered_ = len;
        }
    }

    static constexpr std::uint32_t rotl(std::uint32_t x, int c) {
        return (x << c) | (x >> (32 - c));
    }

    void compress(const std::uint8_t* p) {
        static constexpr std::uint32_t K[64] = {
            0xd76aa478u, 0xe8c7b756u, 0x242070dbu, 0xc1bdceeeu,
            0xf57c0fafu, 0x4787c62au, 0xa8304613u, 0xfd469501u,
            0x698098d8u, 0x8b44f7afu, 0xffff5bb1u, 0x895cd7beu,
            0x6b901122u, 0xfd987193u, 0xa679438eu, 0x49b40821u,
            0xf61e2562u, 0xc040b340u, 0x265e5a51u, 0xe9b6c7aau,
            0xd62f105du, 0x02441453u, 0xd8a1e681u, 0xe7d3fbc8u,
            0x21e1cde6u, 0xc33707d6u, 0xf4d50d87u, 0x455a14edu,
            0xa9e3e905u, 0xfcefa3f8u, 0x676f02d9u, 0x8d2a4c8au,
            0xfffa3942u, 0x8771f681u, 0x6d9d6122u, 0xfde5380cu,
            0xa4beea44u, 0x4bdecfa9u, 0xf6bb4b60u, 0xbebfbc70u,
            0x289b7ec6u, 0xeaa127fau, 0xd4ef3085u, 0x04881d05u,
            0xd9d4d039u, 0xe6db99e5u, 0x1fa27cf8u, 0xc4ac5665u,
            0xf4292244u, 0x432aff97u, 0xab9423a7u, 0xfc93a039u,
            0x655b59c3u, 0x8f0ccc92u, 0xffeff47du, 0x85845dd1u,
            0x6fa87e4fu, 0xfe2ce6e0u, 0xa3014314u, 0x4e0811a1u,
            0xf7537e82u, 0xbd3af235u, 0x2ad7d2bbu, 0xeb86d391u};
        static constexpr int S[64] = {
            7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22,
            5, 9,  14, 20, 5, 9,  14, 20, 5, 9,  14, 20, 5, 9,  14, 20,
            4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23,
            6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21};

        std::uint32_t m[16];
        for (int i = 0; i < 16; ++i) {
            m[i] = static_cast<std::uint32_t>(p[4 * i]) |
                   static_cast<std::uint32_t>(p[4 * i + 1]) << 8 |
                   static_cast<std::uint32_t>(p[4 * i + 2]) << 16 |
                   static_cast<std::uint32_t>(p[4 * i + 3]) << 24;
        }
        std::uint32_t a = a0_, b = b0_, c = c0_, d = d0_;
        for (int i = 0; i < 64; ++i) {
            std::uint32_t f;
            int g;
            if (i < 16) {
                f = (b & c) | (~b & d);
                g = i;
            } else if (i < 32) {
                f = (d & b) | (~d & c);
                g = (5 * i + 1) % 16;
            } else if (i < 48) {
                f = b ^ c ^ d;
                g = (3 * i + 5) % 16;
            } else {
                f = c ^ (b | ~d);
                g = (7 * i) % 16;
            }
            std::uint32_t tmp = d;
            d = c;
            c = b;
            b = b + rotl(a + f + K[i] + m[g], S[i]);
            a = tmp;
        }
        a0_ += a;
        b0_ += b;
        c0_ += c;
        d0_ += d;
    }

    std::uint32_t a0_, b0_, c0_, d0_;
    std::uint64_t total_bytes_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffered_ = 0;
};

inline std::string md5_hex(std::string_view data) { return Md5::hex(data); }

}  // namespace sqlscout::detail
