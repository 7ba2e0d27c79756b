#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "basket/model.hpp"
#include "basket/numerics.hpp"

namespace basket {

class NonPositiveStrike : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// First-order coefficients of sigma_hat_i(T, .) around the forward F_i.
// All analytics run on discounted prices, so F_i = S_i(0).
struct TaylorCoeffs {
    std::vector<double> level;     // p_i = sigma_hat_i(T, F_i)
    std::vector<double> slope;     // q_i = d sigma_hat_i / dF at F_i
    std::vector<double> forwards;  // F_i
};

namespace detail {

// Central difference with relative step 1e-4; fallback for vol families
// without an analytic level slope.
inline double level_slope_fd(const LocalVolFn& vol, double t, double forward) {
    const double h = 1e-4 * forward;
    return (vol.level(t, forward + h) - vol.level(t, forward - h)) / (2.0 * h);
}

// q_i / p_i; for CEV this is beta / F, well defined even when alpha = 0.
inline double slope_over_level(const LocalVolFn& vol, double t, double forward) {
    if (vol.family() == VolFamily::Cev) return vol.beta() / forward;
    const double p = vol.level(t, forward);
    if (!(p > 0.0))
        throw std::invalid_argument("slope_over_level: vanishing volatility level");
    return level_slope_fd(vol, t, forward) / p;
}

}  // namespace detail

inline TaylorCoeffs taylor_coeffs(const BasketModel& model, double maturity) {
    if (!(maturity > 0.0)) throw std::invalid_argument("taylor_coeffs: maturity must be > 0");
    const std::size_t n = model.n();
    TaylorCoeffs out;
    out.level.resize(n);
    out.slope.resize(n);
    out.forwards.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double forward = model.spots[i];
        const LocalVolFn& vol = model.vols[i];
        out.forwards[i] = forward;
        out.level[i] = vol.level(maturity, forward);
        out.slope[i] = vol.family() == VolFamily::Cev
                           ? vol.level_slope(maturity, forward)
                           : detail::level_slope_fd(vol, maturity, forward);
    }
    return out;
}

// int_0^T sigma_hat_i(t, S_i(0)) sigma_hat_j(t, S_j(0)) dt by composite
// Simpson; exact (to roundoff) for the time-independent families.
inline double integrated_cov(const BasketModel& model, double maturity, std::size_t i,
                             std::size_t j, int nodes = 64) {
    if (!(maturity > 0.0)) throw std::invalid_argument("integrated_cov: maturity must be > 0");
    if (i >= model.n() || j >= model.n())
        throw DimensionMismatch("integrated_cov: asset index out of range");
    const double si = model.spots[i];
    const double sj = model.spots[j];
    const LocalVolFn& vi = model.vols[i];
    const LocalVolFn& vj = model.vols[j];
    return simpson([&](double t) { return vi.level(t, si) * vj.level(t, sj); }, 0.0, maturity,
                   nodes);
}

// Moments of the first-order expansion conditional on the jump count:
// mean[k] and variance[k] of S_c(T, k), covariance[k][i] of asset i's
// expansion term with S_c(T, k).
struct ConditionalMoments {
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<std::vector<double>> covariance;
};

inline ConditionalMoments conditional_moments(const BasketModel& model, double maturity,
                                              int k_max) {
    if (k_max < 0) throw std::invalid_argument("conditional_moments: k_max must be >= 0");
    const std::size_t n = model.n();
    const double spot0 = basket_spot(model);
    const double eta = model.jump.eta();
    const double gamma = model.jump.gamma();
    const double gamma_sq = gamma * gamma;
    const double lt_eta = model.lambda * maturity * eta;

    std::vector<std::vector<double>> icov(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            icov[i][j] = icov[j][i] = integrated_cov(model, maturity, i, j);

    ConditionalMoments out;
    out.mean.resize(k_max + 1);
    out.variance.resize(k_max + 1);
    out.covariance.assign(k_max + 1, std::vector<double>(n));

    for (int k = 0; k <= k_max; ++k) {
        out.mean[k] = (1.0 - lt_eta + k * eta) * spot0;
        const double jump_var = k * gamma_sq;

        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                var += model.weights[i] * model.weights[j] *
                       (icov[i][j] * model.corr[i][j] + jump_var * model.spots[i] * model.spots[j]);
        out.variance[k] = var;

        for (std::size_t i = 0; i < n; ++i) {
            double cov = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                cov += model.weights[j] *
                       (model.corr[i][j] * icov[i][j] + jump_var * model.spots[i] * model.spots[j]);
            out.covariance[k][i] = cov;
        }
    }
    return out;
}

struct AbcCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

// Coefficients of the affine level-variance approximation
// sigma_hat(T, K)^2 = a(T) + b(T) K - c(T) S(0).
inline AbcCoeffs abc_coeffs(const BasketModel& model, double maturity,
                            double tail_tol = kPoissonTailTol) {
    const std::size_t n = model.n();
    const TaylorCoeffs tc = taylor_coeffs(model, maturity);
    const std::vector<double> weights = poisson_weights(model.lambda, maturity, tail_tol);
    const int k_max = static_cast<int>(weights.size()) - 1;
    const ConditionalMoments cm = conditional_moments(model, maturity, k_max);
    const double eta = model.jump.eta();
    const double lt_eta = model.lambda * maturity * eta;

    std::vector<double> ratio(n);  // q_i / p_i
    for (std::size_t i = 0; i < n; ++i)
        ratio[i] = detail::slope_over_level(model.vols[i], maturity, tc.forwards[i]);

    AbcCoeffs out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.a += model.weights[i] * model.weights[j] * model.corr[i][j] * tc.level[i] *
                     tc.level[j];

    // row[i] = w_i p_i sum_j w_j p_j rho_ij collapses the double sum to a
    // single one; the symmetric (i, j) pairing doubles the ratio term.
    std::vector<double> row(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            row[i] += model.weights[j] * tc.level[j] * model.corr[i][j];
        row[i] *= model.weights[i] * tc.level[i];
    }

    for (int k = 0; k <= k_max; ++k) {
        const double var = cm.variance[k];
        if (!(var > 0.0)) continue;  // degenerate zero-variance term contributes nothing
        double inner = 0.0;
        for (std::size_t i = 0; i < n; ++i) inner += row[i] * ratio[i] * cm.covariance[k][i];
        inner *= 2.0;
        const double scale = weights[k] / var;
        out.b += scale * inner;
        out.c += scale * inner * (1.0 - lt_eta + k * eta);
    }
    return out;
}

// Evaluable local volatility surface: a(T), b(T), c(T) sampled on a maturity
// grid, linear in T in between and clamped at the ends. The affine level
// variance can turn negative for small strikes; it is floored at
// variance_floor before the square root so the PIDE stays parabolic.
class LocalVolSurface {
public:
    LocalVolSurface(std::vector<double> maturities, std::vector<double> a, std::vector<double> b,
                    std::vector<double> c, double spot0, double variance_floor)
        : times_(std::move(maturities)),
          a_(std::move(a)),
          b_(std::move(b)),
          c_(std::move(c)),
          spot0_(spot0),
          floor_(variance_floor) {
        if (times_.empty() || a_.size() != times_.size() || b_.size() != times_.size() ||
            c_.size() != times_.size())
            throw std::invalid_argument("LocalVolSurface: inconsistent coefficient arrays");
        if (!(spot0_ > 0.0)) throw std::invalid_argument("LocalVolSurface: spot must be > 0");
        if (!(floor_ >= 0.0)) throw std::invalid_argument("LocalVolSurface: floor must be >= 0");
        for (std::size_t i = 0; i + 1 < times_.size(); ++i)
            if (!(times_[i] < times_[i + 1]))
                throw std::invalid_argument("LocalVolSurface: maturities must increase");
    }

    static double default_variance_floor(double spot0) {
        const double s = 1e-4 * spot0;
        return s * s;
    }

    static LocalVolSurface build(const BasketModel& model, std::vector<double> maturities,
                                 double variance_floor = -1.0) {
        const double spot0 = basket_spot(model);
        if (variance_floor < 0.0) variance_floor = default_variance_floor(spot0);
        std::vector<double> a(maturities.size()), b(maturities.size()), c(maturities.size());
        for (std::size_t i = 0; i < maturities.size(); ++i) {
            const AbcCoeffs abc = abc_coeffs(model, maturities[i]);
            a[i] = abc.a;
            b[i] = abc.b;
            c[i] = abc.c;
        }
        return LocalVolSurface(std::move(maturities), std::move(a), std::move(b), std::move(c),
                               spot0, variance_floor);
    }

    AbcCoeffs coeffs_at(double maturity) const {
        if (maturity <= times_.front()) return {a_.front(), b_.front(), c_.front()};
        if (maturity >= times_.back()) return {a_.back(), b_.back(), c_.back()};
        std::size_t lo = 0;
        std::size_t hi = times_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (times_[mid] <= maturity ? lo : hi) = mid;
        }
        const double t = (maturity - times_[lo]) / (times_[lo + 1] - times_[lo]);
        return {a_[lo] + t * (a_[lo + 1] - a_[lo]), b_[lo] + t * (b_[lo + 1] - b_[lo]),
                c_[lo] + t * (c_[lo + 1] - c_[lo])};
    }

    // floored level variance max(a + bK - c S(0), floor)
    double level_variance(double maturity, double strike) const {
        if (!(strike > 0.0)) throw NonPositiveStrike("local_vol: strike must be > 0");
        const AbcCoeffs abc = coeffs_at(maturity);
        return std::max(abc.a + abc.b * strike - abc.c * spot0_, floor_);
    }

    double sigma(double maturity, double strike) const {
        return std::sqrt(level_variance(maturity, strike)) / strike;
    }

    double sigma_sq(double maturity, double strike) const {
        return level_variance(maturity, strike) / (strike * strike);
    }

    double spot0() const { return spot0_; }
    double variance_floor() const { return floor_; }
    const std::vector<double>& maturities() const { return times_; }
    const std::vector<double>& a() const { return a_; }
    const std::vector<double>& b() const { return b_; }
    const std::vector<double>& c() const { return c_; }

private:
    std::vector<double> times_;
    std::vector<double> a_;
    std::vector<double> b_;
    std::vector<double> c_;
    double spot0_;
    double floor_;
};

inline double local_vol(const LocalVolSurface& surface, double maturity, double strike) {
    return surface.sigma(maturity, strike);
}

}  // namespace basket
