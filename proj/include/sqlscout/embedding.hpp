#pragma once

// Embedding backends. The deterministic fallback is a token-hashing
// projection: lowercase alphanumeric tokens, FNV-1a 64-bit hash per token,
// bucket = hash mod dimension, sign from hash bit 32, accumulate, then L2
// normalize. Text with no tokens maps to the zero vector (no
// normalization). Identical text always embeds identically.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqlscout/errors.hpp"

namespace sqlscout {

inline constexpr int kFallbackEmbeddingDim = 256;

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual int dimension() const = 0;
    virtual std::vector<double> embed(std::string_view text) = 0;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace detail

class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(int dim = kFallbackEmbeddingDim) : dim_(dim) {}

    int dimension() const override { return dim_; }

    std::vector<double> embed(std::string_view text) override {
        std::vector<double> v(static_cast<std::size_t>(dim_), 0.0);
        std::string token;
        bool any = false;
        auto flush = [&] {
            if (token.empty()) return;
            std::uint64_t h = detail::fnv1a64(token);
            std::size_t idx = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim_));
            double sign = ((h >> 32) & 1ull) ? 1.0 : -1.0;
            v[idx] += sign;
            any = true;
            token.clear();
        };
        for (char c : text) {
            unsigned char uc = static_cast<unsigned char>(c);
            if (std::isalnum(uc) || c == '_')
                token += static_cast<char>(std::tolower(uc));
            else
                flush();
        }
        flush();
        if (!any) return v;  // zero-token text stays the zero vector
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (double& x : v) x /= norm;
        return v;
    }

private:
    int dim_;
};

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace sqlscout
