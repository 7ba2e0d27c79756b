#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "basket/numerics.hpp"

namespace basket {

class NonPsdCorrelation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kPoissonTailTol = 1e-12;
inline constexpr int kPoissonMaxTerms = 10000;
inline constexpr double kCorrPivotTol = 1e-12;

enum class VolFamily { Cev };

// Local volatility sigma(t, S) = alpha * S^(beta - 1), 0 < beta <= 1.
// alpha = 0 is admitted as the degenerate driftless asset.
class LocalVolFn {
public:
    LocalVolFn(double alpha, double beta) : alpha_(alpha), beta_(beta) {
        if (!(alpha >= 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("LocalVolFn: alpha must be a finite value >= 0");
        if (!(beta > 0.0) || !(beta <= 1.0))
            throw std::invalid_argument("LocalVolFn: beta must lie in (0, 1]");
    }

    VolFamily family() const { return VolFamily::Cev; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    bool time_independent() const { return true; }

    // sigma(t, S); finite for every S > 0
    double value(double /*t*/, double spot) const {
        if (beta_ == 1.0) return alpha_;
        return alpha_ * std::pow(spot, beta_ - 1.0);
    }

    // sigma_hat(t, S) = sigma(t, S) * S; continuous through S = 0
    double level(double /*t*/, double spot) const {
        if (spot <= 0.0) return 0.0;
        if (beta_ == 1.0) return alpha_ * spot;
        return alpha_ * std::pow(spot, beta_);
    }

    // d sigma_hat / dF at F
    double level_slope(double /*t*/, double forward) const {
        if (beta_ == 1.0) return alpha_;
        return alpha_ * beta_ * std::pow(forward, beta_ - 1.0);
    }

private:
    double alpha_;
    double beta_;
};

// Common jump variable Y: Normal(eta, gamma^2) or a constant log-size.
// The constant case is carried as (eta = y, gamma = 0) plus a tag, so the
// moment formulas need no branching.
class JumpSpec {
public:
    static JumpSpec normal(double eta, double gamma) {
        if (!(gamma >= 0.0) || !std::isfinite(gamma))
            throw std::invalid_argument("JumpSpec: gamma must be a finite value >= 0");
        if (!std::isfinite(eta)) throw std::invalid_argument("JumpSpec: eta must be finite");
        return JumpSpec(eta, gamma, false);
    }

    static JumpSpec constant(double log_size) {
        if (!std::isfinite(log_size))
            throw std::invalid_argument("JumpSpec: jump log-size must be finite");
        return JumpSpec(log_size, 0.0, true);
    }

    double eta() const { return eta_; }
    double gamma() const { return gamma_; }
    bool is_constant() const { return constant_; }

    // m = E[e^Y - 1] = exp(eta + gamma^2/2) - 1; always > -1
    double mean_relative_jump() const { return std::expm1(eta_ + 0.5 * gamma_ * gamma_); }

private:
    JumpSpec(double eta, double gamma, bool constant) : eta_(eta), gamma_(gamma), constant_(constant) {}

    double eta_;
    double gamma_;
    bool constant_;
};

inline double expected_jump(const JumpSpec& jump) { return jump.mean_relative_jump(); }

struct OptionSpec {
    double strike;
    double maturity;

    OptionSpec(double strike_, double maturity_) : strike(strike_), maturity(maturity_) {
        if (!(strike > 0.0)) throw std::invalid_argument("OptionSpec: strike must be > 0");
        if (!(maturity > 0.0)) throw std::invalid_argument("OptionSpec: maturity must be > 0");
    }
};

struct BasketModel {
    std::vector<double> spots;               // S_i(0)
    std::vector<double> weights;             // w_i > 0
    std::vector<std::vector<double>> corr;   // rho_ij
    std::vector<LocalVolFn> vols;
    JumpSpec jump = JumpSpec::normal(0.0, 0.0);
    double lambda = 0.0;                     // jump intensity per year
    double rate = 0.0;                       // risk-free rate per year

    std::size_t n() const { return spots.size(); }
};

// Lower-triangular factor L with L L^T = corr (row-major, upper part zero).
class CorrelationFactor {
public:
    CorrelationFactor(std::size_t n, std::vector<double> lower) : n_(n), lower_(std::move(lower)) {
        if (lower_.size() != n_ * n_)
            throw DimensionMismatch("CorrelationFactor: storage does not match dimension");
    }

    std::size_t size() const { return n_; }
    double at(std::size_t i, std::size_t j) const { return lower_[i * n_ + j]; }
    const std::vector<double>& data() const { return lower_; }

    // out = L z
    void transform(std::span<const double> z, std::span<double> out) const {
        for (std::size_t i = 0; i < n_; ++i) {
            double acc = 0.0;
            const double* row = lower_.data() + i * n_;
            for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
            out[i] = acc;
        }
    }

private:
    std::size_t n_;
    std::vector<double> lower_;
};

// Structural and numerical validation of a model. Returns the correlation
// factor Monte Carlo needs. PSD is decided by the factorization itself: a
// pivot below -kCorrPivotTol fails, a pivot in [-tol, 0] is clamped to zero
// (semidefinite correlation is legal).
inline CorrelationFactor validate(const BasketModel& model) {
    const std::size_t n = model.n();
    if (n == 0) throw DimensionMismatch("model: empty basket");
    if (model.weights.size() != n)
        throw DimensionMismatch("model: weights length differs from asset count");
    if (model.vols.size() != n)
        throw DimensionMismatch("model: vols length differs from asset count");
    if (model.corr.size() != n)
        throw DimensionMismatch("model: correlation row count differs from asset count");
    for (const auto& row : model.corr)
        if (row.size() != n)
            throw DimensionMismatch("model: correlation matrix is not square");

    for (std::size_t i = 0; i < n; ++i) {
        if (!(model.spots[i] > 0.0) || !std::isfinite(model.spots[i]))
            throw std::invalid_argument("model: spots must be finite and > 0");
        if (!(model.weights[i] > 0.0) || !std::isfinite(model.weights[i]))
            throw std::invalid_argument("model: weights must be finite and > 0");
    }
    if (!(model.lambda >= 0.0) || !std::isfinite(model.lambda))
        throw std::invalid_argument("model: lambda must be finite and >= 0");
    if (!std::isfinite(model.rate)) throw std::invalid_argument("model: rate must be finite");

    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(model.corr[i][i] - 1.0) > 1e-12)
            throw NonPsdCorrelation("correlation: diagonal entries must equal 1");
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(model.corr[i][j] - model.corr[j][i]) > 1e-12)
                throw NonPsdCorrelation("correlation: matrix must be symmetric");
    }

    std::vector<double> lower(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double pivot = model.corr[k][k];
        for (std::size_t j = 0; j < k; ++j) pivot -= lower[k * n + j] * lower[k * n + j];
        if (pivot < -kCorrPivotTol)
            throw NonPsdCorrelation("correlation: matrix is not positive semidefinite");
        pivot = pivot > 0.0 ? std::sqrt(pivot) : 0.0;
        lower[k * n + k] = pivot;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (pivot == 0.0) {
                lower[i * n + k] = 0.0;
                continue;
            }
            double acc = model.corr[i][k];
            for (std::size_t j = 0; j < k; ++j) acc -= lower[i * n + j] * lower[k * n + j];
            lower[i * n + k] = acc / pivot;
        }
    }
    return CorrelationFactor(n, std::move(lower));
}

// P(N(T) = k) for k = 0..K_max, truncated at the smallest K_max whose
// remaining tail mass is below tail_tol.
inline std::vector<double> poisson_weights(double lambda, double maturity,
                                           double tail_tol = kPoissonTailTol) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("poisson_weights: lambda must be >= 0");
    if (!(maturity > 0.0)) throw std::invalid_argument("poisson_weights: maturity must be > 0");
    if (!(tail_tol > 0.0 && tail_tol < 1.0))
        throw std::invalid_argument("poisson_weights: tail_tol must be in (0, 1)");

    const double mean = lambda * maturity;
    if (mean == 0.0) return {1.0};

    std::vector<double> weights;
    double w = std::exp(-mean);
    double cum = w;
    weights.push_back(w);
    int k = 0;
    while (1.0 - cum >= tail_tol) {
        if (++k > kPoissonMaxTerms)
            throw TruncationError("poisson_weights: truncation cap of 10000 terms exceeded");
        w *= mean / k;
        cum += w;
        weights.push_back(w);
    }
    return weights;
}

// S(0) = sum_i w_i S_i(0)
inline double basket_spot(const BasketModel& model) {
    double acc = 0.0;
    for (std::size_t i = 0; i < model.n(); ++i) acc += model.weights[i] * model.spots[i];
    return acc;
}

}  // namespace basket
