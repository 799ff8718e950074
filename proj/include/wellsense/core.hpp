// Core utilities shared by every wellsense module: calendar dates,
// deterministic random streams, error types and locale-free numeric I/O.
#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace wellsense {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define WELLSENSE_ERROR(NAME)                                                  \
    struct NAME : Error {                                                      \
        using Error::Error;                                                    \
    }

WELLSENSE_ERROR(MissingColumnError);
WELLSENSE_ERROR(DuplicateTimestampError);
WELLSENSE_ERROR(EmptyFileError);
WELLSENSE_ERROR(ParseError);
WELLSENSE_ERROR(InvariantError);
WELLSENSE_ERROR(IoError);
WELLSENSE_ERROR(InvalidConfigError);
WELLSENSE_ERROR(NoFlowError);
WELLSENSE_ERROR(TooFewSamplesError);
WELLSENSE_ERROR(TooFewWellsError);
WELLSENSE_ERROR(ConstantFeatureError);
WELLSENSE_ERROR(ShapeMismatchError);
WELLSENSE_ERROR(SingularSystemError);
WELLSENSE_ERROR(DivergenceError);
WELLSENSE_ERROR(DomainError);
WELLSENSE_ERROR(LengthMismatchError);
WELLSENSE_ERROR(EmptyPartitionError);
WELLSENSE_ERROR(IncompatibleFeaturesError);

#undef WELLSENSE_ERROR

// ---------------------------------------------------------------------------
// Date: a UTC calendar day, stored as days since 1970-01-01.
// ---------------------------------------------------------------------------

class Date {
public:
    Date() = default;
    explicit constexpr Date(std::int64_t days) : days_(days) {}

    static constexpr Date from_ymd(int year, int month, int day) {
        // Howard Hinnant's civil-from-days algorithm, inverted.
        year -= month <= 2;
        const std::int64_t era = (year >= 0 ? year : year - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(year - era * 400);
        const unsigned doy =
            (153u * static_cast<unsigned>(month + (month > 2 ? -3 : 9)) + 2u) / 5u +
            static_cast<unsigned>(day) - 1u;
        const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
        return Date(era * 146097 + static_cast<std::int64_t>(doe) - 719468);
    }

    struct Ymd {
        int year;
        int month;
        int day;
    };

    constexpr Ymd ymd() const {
        std::int64_t z = days_ + 719468;
        const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp < 10 ? mp + 3 : mp - 9;
        return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
    }

    constexpr std::int64_t days_since_epoch() const { return days_; }

    std::string to_string() const {
        const Ymd v = ymd();
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", v.year, v.month, v.day);
        return buf;
    }

    // Parses ISO-8601 YYYY-MM-DD.
    static std::optional<Date> parse(std::string_view s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
        int y = 0, m = 0, d = 0;
        auto num = [](std::string_view t, int& out) {
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
            return ec == std::errc() && p == t.data() + t.size();
        };
        if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d))
            return std::nullopt;
        if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
        return from_ymd(y, m, d);
    }

    friend constexpr Date operator+(Date a, std::int64_t n) { return Date(a.days_ + n); }
    friend constexpr Date operator-(Date a, std::int64_t n) { return Date(a.days_ - n); }
    friend constexpr std::int64_t operator-(Date a, Date b) { return a.days_ - b.days_; }
    friend constexpr auto operator<=>(Date, Date) = default;

private:
    std::int64_t days_ = 0;
};

// ---------------------------------------------------------------------------
// Rng: splitmix64 stream with hand-rolled distributions so that generated
// data is bit-identical across standard libraries. Streams split off a
// parent stay decorrelated, which keeps per-well generation order-free.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw DomainError("uniform_int: n must be positive");
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = (0ULL - n) % n;
            while (lo < t) {
                m = static_cast<__uint128_t>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via Box-Muller; the second deviate is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Deterministic child stream; independent of draws made on the parent.
    Rng split(std::uint64_t stream) const {
        std::uint64_t z = state_ ^ (0xD1B54A32D192ED03ULL * (stream + 1));
        z = (z ^ (z >> 29)) * 0xFF51AFD7ED558CCDULL;
        z = (z ^ (z >> 32)) * 0xC4CEB9FE1A85EC53ULL;
        return Rng(z ^ (z >> 29));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[uniform_int(i)]);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// ---------------------------------------------------------------------------
// Numeric I/O: shortest round-trip formatting, locale-free parsing.
// ---------------------------------------------------------------------------

inline std::string fmt_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// Stable 64-bit content hash (FNV-1a); used to derive seeds from values
// rather than positions, so reordering a collection cannot change results.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

namespace stats {

// Hazen linear-interpolation quantile: plotting position h = n*p + 0.5 over
// the sorted sample (1-based), clamped to [1, n]. This is the method the
// IQR fences are defined against; keep any other quantile use consistent.
inline double quantile_hazen(std::vector<double> v, double p) {
    if (v.empty()) throw DomainError("quantile of empty sample");
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double h = n * p + 0.5;
    if (h < 1.0) h = 1.0;
    if (h > n) h = n;
    const auto lo = static_cast<std::size_t>(h) - 1;
    const double frac = h - std::floor(h);
    if (frac == 0.0 || lo + 1 >= v.size()) return v[lo];
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw DomainError("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace stats

// Runs fn(0..n-1) on up to `jobs` worker threads. Tasks must write to
// disjoint slots; results are then independent of scheduling, which keeps
// parallel runs bit-identical to serial ones. The first exception wins and
// is rethrown on the caller thread.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace wellsense
