// Deterministic randomness: seed derivation for named substreams and a
// small RNG wrapper with hand-rolled draws, so that results depend only on
// the mt19937_64 engine (fully specified by the standard) and not on
// libstdc++ distribution internals.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>
#include <vector>

namespace fanet {

// Incremental 64-bit FNV-1a. Used both for substream seed derivation and
// for trace digests.
class Fnv1a {
public:
    void put_bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= b[i];
            h_ *= 1099511628211ull;
        }
    }
    void put_u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        put_bytes(b, 8);
    }
    void put_i64(std::int64_t v) { put_u64(static_cast<std::uint64_t>(v)); }
    void put_double(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64(bits);
    }
    void put_str(std::string_view s) {
        put_bytes(s.data(), s.size());
        put_u64(s.size());  // length mark: keeps ("ab","c") != ("a","bc")
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 1469598103934665603ull;
};

inline std::uint64_t seed_stream(std::uint64_t root, std::string_view tag) {
    Fnv1a h;
    h.put_u64(root);
    h.put_str(tag);
    return h.value();
}
inline std::uint64_t seed_stream(std::uint64_t root, std::string_view tag, std::uint64_t a) {
    Fnv1a h;
    h.put_u64(root);
    h.put_str(tag);
    h.put_u64(a);
    return h.value();
}
inline std::uint64_t seed_stream(std::uint64_t root, std::string_view tag, std::uint64_t a,
                                 std::uint64_t b) {
    Fnv1a h;
    h.put_u64(root);
    h.put_str(tag);
    h.put_u64(a);
    h.put_u64(b);
    return h.value();
}
inline std::uint64_t seed_stream(std::uint64_t root, std::string_view tag, std::uint64_t a,
                                 std::uint64_t b, std::uint64_t c) {
    Fnv1a h;
    h.put_u64(root);
    h.put_str(tag);
    h.put_u64(a);
    h.put_u64(b);
    h.put_u64(c);
    return h.value();
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased draw from [0,n).
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x < threshold);
        return x % n;
    }

    // Standard normal via Box-Muller; the second value is discarded so every
    // call consumes exactly two engine draws.
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0,1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }
    double normal(double mean, double sd) { return mean + sd * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // First k entries of a seeded permutation of [0,n).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        shuffle(idx);
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace fanet
