#pragma once

// Shared fixtures and independent reference implementations for the test
// suites. Everything here is deliberately written from scratch (naive
// summations, quadrature, lognormal series) so it exercises none of the
// library code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "basket/model.hpp"

namespace testsupport {

// Symmetric n-asset basket used throughout the comparison tables:
// spots 100, equal weights, equicorrelated Brownian motions.
inline basket::BasketModel make_basket(int n, double rho, double alpha, double beta,
                                       basket::JumpSpec jump, double lambda, double rate = 0.0) {
    basket::BasketModel model;
    model.spots.assign(n, 100.0);
    model.weights.assign(n, 1.0 / n);
    model.corr.assign(n, std::vector<double>(n, rho));
    for (int i = 0; i < n; ++i) model.corr[i][i] = 1.0;
    for (int i = 0; i < n; ++i) model.vols.emplace_back(alpha, beta);
    model.jump = jump;
    model.lambda = lambda;
    model.rate = rate;
    return model;
}

inline basket::BasketModel table1_base_model() {
    return make_basket(4, 0.3, 0.2, 1.0, basket::JumpSpec::normal(-0.08, 0.35), 0.3);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-13, int depth = 40) {
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

// E[(X - K)^+] for X ~ Normal(mu, sigma^2) by adaptive quadrature of the
// truncated density; independent of the closed form it checks.
inline double normal_call_quadrature(double mu, double sigma, double strike) {
    if (sigma == 0.0) return std::max(mu - strike, 0.0);
    const double hi = mu + 14.0 * sigma;
    if (strike >= hi) return 0.0;
    const double lo = std::max(strike, mu - 14.0 * sigma);
    return adaptive_simpson(
        [&](double x) { return (x - strike) * std_normal_pdf((x - mu) / sigma) / sigma; }, lo, hi,
        1e-14);
}

// E[(X - K)^+] for ln X ~ Normal(mu, s^2)
inline double lognormal_call(double mu, double s, double strike) {
    if (s <= 0.0) return std::max(std::exp(mu) - strike, 0.0);
    const double lk = std::log(strike);
    const double d2 = (mu - lk) / s;
    const double d1 = d2 + s;
    return std::exp(mu + 0.5 * s * s) * std_normal_cdf(d1) - strike * std_normal_cdf(d2);
}

inline double black_scholes_call(double spot, double strike, double maturity, double rate,
                                 double sigma) {
    const double mu = std::log(spot) + (rate - 0.5 * sigma * sigma) * maturity;
    return std::exp(-rate * maturity) * lognormal_call(mu, sigma * std::sqrt(maturity), strike);
}

// Series price for a single lognormal asset with systematic normal jumps and
// compensated drift r - lambda m; conditioning on the jump count gives a
// lognormal mixture.
inline double merton_series_call(double spot, double strike, double maturity, double rate,
                                 double sigma, double lambda, double eta, double gamma,
                                 int terms = 40) {
    const double m = std::expm1(eta + 0.5 * gamma * gamma);
    const double mean = lambda * maturity;
    double weight = std::exp(-mean);
    double acc = 0.0;
    for (int n = 0; n < terms; ++n) {
        if (n > 0) weight *= mean / n;
        const double mu = std::log(spot) + (rate - lambda * m - 0.5 * sigma * sigma) * maturity +
                          n * eta;
        const double s = std::sqrt(sigma * sigma * maturity + n * gamma * gamma);
        acc += weight * lognormal_call(mu, s, strike);
    }
    return std::exp(-rate * maturity) * acc;
}

// Literal re-summation of the affine level-variance coefficients with a wide
// fixed truncation, written as the plain triple loop.
struct NaiveAbc {
    double a, b, c;
};

inline NaiveAbc naive_abc(const basket::BasketModel& model, double maturity, int k_max = 60) {
    const int n = static_cast<int>(model.n());
    const double eta = model.jump.eta();
    const double gamma = model.jump.gamma();
    const double mean = model.lambda * maturity;

    std::vector<double> p(n), g(n);
    for (int i = 0; i < n; ++i) {
        p[i] = model.vols[i].level(maturity, model.spots[i]);
        g[i] = model.vols[i].beta() / model.spots[i];
    }
    std::vector<std::vector<double>> icov(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            icov[i][j] = maturity * model.vols[i].level(0.0, model.spots[i]) *
                         model.vols[j].level(0.0, model.spots[j]);

    std::vector<double> weight(k_max + 1);
    weight[0] = std::exp(-mean);
    for (int k = 1; k <= k_max; ++k) weight[k] = weight[k - 1] * mean / k;

    auto cov_i = [&](int i, int k) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += model.weights[j] * (model.corr[i][j] * icov[i][j] +
                                       k * gamma * gamma * model.spots[i] * model.spots[j]);
        return acc;
    };
    auto var_c = [&](int k) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                acc += model.weights[i] * model.weights[j] *
                       (icov[i][j] * model.corr[i][j] +
                        k * gamma * gamma * model.spots[i] * model.spots[j]);
        return acc;
    };

    NaiveAbc out{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.a += model.weights[i] * model.weights[j] * model.corr[i][j] * p[i] * p[j];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k <= k_max; ++k) {
                const double var = var_c(k);
                if (!(var > 0.0)) continue;
                const double core = weight[k] / var * model.weights[i] * model.weights[j] *
                                    model.corr[i][j] * p[i] * p[j] *
                                    (g[i] * cov_i(i, k) + g[j] * cov_i(j, k));
                out.b += core;
                out.c += core * (1.0 - model.lambda * maturity * eta + k * eta);
            }
        }
    }
    return out;
}

}  // namespace testsupport
