#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace basket {

inline constexpr double kPi = 3.14159265358979323846;

inline double norm_pdf(double x) {
    static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * kPi);
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

// Complementary-error-function route: absolute error below 1e-15 on the
// whole line, no cancellation in the tails.
inline double norm_cdf(double x) {
    static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    return 0.5 * std::erfc(-x * inv_sqrt2);
}

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Composite Simpson rule on [a, b]; n is rounded up to the next even count.
template <typename F>
double simpson(F&& f, double a, double b, int n = 64) {
    if (n < 2) n = 2;
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double odd = 0.0;
    double even = 0.0;
    for (int i = 1; i < n; i += 2) odd += f(a + i * h);
    for (int i = 2; i < n; i += 2) even += f(a + i * h);
    return (h / 3.0) * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

// Thomas algorithm for a tridiagonal system. `lower` and `upper` have
// size n-1, `diag` and `rhs` size n. Throws SolverFailure on a vanishing
// pivot; unreachable for the diagonally dominant systems assembled here.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return {};
    if (lower.size() + 1 != n || upper.size() + 1 != n || rhs.size() != n)
        throw std::invalid_argument("solve_tridiagonal: inconsistent band sizes");

    std::vector<double> scratch(n > 1 ? n - 1 : 0);
    std::vector<double> x(n);

    double pivot = diag[0];
    if (std::abs(pivot) < 1e-300) throw SolverFailure("tridiagonal pivot underflow");
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i - 1] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i - 1] * scratch[i - 1];
        if (std::abs(pivot) < 1e-300) throw SolverFailure("tridiagonal pivot underflow");
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i] * x[i + 1];
    return x;
}

// Monotone-preserving cubic Hermite interpolant (Fritsch-Carlson limiter).
// Evaluation clamps outside the node range.
class MonotoneCubic {
public:
    MonotoneCubic(std::span<const double> xs, std::span<const double> ys)
        : x_(xs.begin(), xs.end()), y_(ys.begin(), ys.end()) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("MonotoneCubic: need >= 2 nodes and equal sizes");
        slope_.resize(n);
        std::vector<double> secant(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double h = x_[i + 1] - x_[i];
            if (!(h > 0.0)) throw std::invalid_argument("MonotoneCubic: nodes must increase");
            secant[i] = (y_[i + 1] - y_[i]) / h;
        }
        slope_[0] = secant[0];
        slope_[n - 1] = secant[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (secant[i - 1] * secant[i] <= 0.0)
                slope_[i] = 0.0;
            else
                slope_[i] = 0.5 * (secant[i - 1] + secant[i]);
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (secant[i] == 0.0) {
                slope_[i] = 0.0;
                slope_[i + 1] = 0.0;
                continue;
            }
            const double a = slope_[i] / secant[i];
            const double b = slope_[i + 1] / secant[i];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double tau = 3.0 / std::sqrt(s);
                slope_[i] = tau * a * secant[i];
                slope_[i + 1] = tau * b * secant[i];
            }
        }
    }

    double operator()(double x) const {
        if (x <= x_.front()) return y_.front();
        if (x >= x_.back()) return y_.back();
        std::size_t lo = 0;
        std::size_t hi = x_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (x_[mid] <= x ? lo : hi) = mid;
        }
        const double h = x_[lo + 1] - x_[lo];
        const double t = (x - x_[lo]) / h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        return h00 * y_[lo] + h10 * h * slope_[lo] + h01 * y_[lo + 1] + h11 * h * slope_[lo + 1];
    }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> slope_;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Counter-based substream derivation: stream k of a master seed is
// independent of all other streams and of the thread schedule.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t counter) {
    std::uint64_t state = master + 0xD1342543DE82EF95ull * (counter + 1);
    (void)splitmix64(state);
    return splitmix64(state);
}

// Self-contained random source for path simulation: 64-bit Mersenne state,
// polar-method normals with one cached value, Poisson counts by inversion.
// Not thread-safe; create one per worker.
class PathRng {
public:
    explicit PathRng(std::uint64_t seed) : state_(seed == 0 ? 0x9E3779B97F4A7C15ull : seed) {
        // warm-up so that low-entropy seeds decorrelate
        for (int i = 0; i < 4; ++i) (void)splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in (0, 1]
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s <= 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    // Sequential-search inversion; intended for small means (lambda * dt).
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double u = uniform();
        double p = std::exp(-mean);
        double cum = p;
        int k = 0;
        while (u > cum && k < 1024) {
            ++k;
            p *= mean / k;
            cum += p;
        }
        return k;
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

namespace detail {

inline std::size_t next_pow2(std::size_t v) {
    std::size_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

inline void hash_mix(std::uint64_t& h, std::uint64_t v) {
    h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
}

inline void hash_mix(std::uint64_t& h, double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    __builtin_memcpy(&bits, &v, sizeof(bits));
    hash_mix(h, bits);
}

}  // namespace detail

}  // namespace basket
