#pragma once

#include <cstdint>
#include <cmath>

#include "kmc/common.hpp"

namespace kmc {

// Philox4x32-10 counter-based generator. Each (seed, stream) pair is an
// independent stream; `stream` is the replication index, so results do not
// depend on how replications are sheduled across workers.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    // Uniform on (0,1), never returning an endpoint.
    double uniform() { return (static_cast<double>(next_u32()) + 0.5) * 0x1p-32; }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * pi * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    int bernoulli() { return uniform() < 0.5 ? 0 : 1; }

private:
    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    void refill() {
        std::uint32_t x0 = static_cast<std::uint32_t>(block_);
        std::uint32_t x1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t x2 = static_cast<std::uint32_t>(stream_);
        std::uint32_t x3 = static_cast<std::uint32_t>(stream_ >> 32);
        std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(0xD2511F53u, x0, hi0, lo0);
            mulhilo(0xCD9E8D57u, x2, hi1, lo1);
            x0 = hi1 ^ x1 ^ k0;
            x1 = lo1;
            x2 = hi0 ^ x3 ^ k1;
            x3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        out_[0] = x0;
        out_[1] = x1;
        out_[2] = x2;
        out_[3] = x3;
        ++block_;
        pos_ = 0;
    }

    std::uint32_t next_u32() {
        if (pos_ >= 4) refill();
        return out_[pos_++];
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::uint32_t out_[4] = {0, 0, 0, 0};
    int pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace kmc
