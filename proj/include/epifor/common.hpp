#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "epifor/errors.hpp"

namespace epifor {

// ---------------------------------------------------------------------------
// Deterministic random numbers.
//
// std::mt19937_64 output is fully specified by the standard, but the
// std::*_distribution adapters are not. Everything random in this library
// goes through the mappings below so that a seed pins the output bit for bit
// on every platform.
// ---------------------------------------------------------------------------
namespace rng {

using Engine = std::mt19937_64;

/// Uniform double in [0, 1) using the top 53 bits of one engine draw.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller. Consumes exactly two engine draws.
inline double normal(Engine& eng) {
    double u1 = uniform01(eng);
    double u2 = uniform01(eng);
    // Guard the log against an exact zero draw.
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Uniform integer in [0, n) without std::uniform_int_distribution.
inline std::uint64_t below(Engine& eng, std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform01(eng) * static_cast<double>(n)) % n;
}

/// 64-bit FNV-1a, used to derive independent seeds from string tags.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// splitmix64 step, the usual seed-stream expander.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derive a sub-seed for a named unit of work (fold, trajectory, location).
inline std::uint64_t derive(std::uint64_t base, std::string_view tag) {
    std::uint64_t s = base ^ fnv1a(tag);
    return splitmix64(s);
}

} // namespace rng

// ---------------------------------------------------------------------------
// Small statistics helpers shared across modules.
// ---------------------------------------------------------------------------
namespace stats {

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw ArgumentError("mean of empty vector");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample variance (n-1 denominator).
inline double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw ArgumentError("variance needs at least 2 values");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double stddev(const std::vector<double>& v) { return std::sqrt(variance(v)); }

/// Median; even counts take the midpoint of the two central order statistics.
inline double median(std::vector<double> v) {
    if (v.empty()) throw ArgumentError("median of empty vector");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace stats

// ---------------------------------------------------------------------------
// Deterministic parallel map: work item i writes slot i, so the result does
// not depend on thread scheduling.
// ---------------------------------------------------------------------------
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    int k = jobs > 0 ? jobs : (hw > 0 ? hw : 1);
    k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), n));
    if (k <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(k));
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int w = 0; w < k; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(k)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Shortest round-trip decimal rendering of a double; deterministic across runs.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

} // namespace epifor
