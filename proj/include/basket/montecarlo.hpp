#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <vector>

#include "basket/analytic.hpp"
#include "basket/model.hpp"
#include "basket/numerics.hpp"

namespace basket {

struct McConfig {
    long paths = 30000;            // per batch
    int batches = 4;               // independent replications
    int steps_per_year = 512;
    std::uint64_t seed = 0x5EEDBA5E2024ull;
    bool use_control_variate = true;
    bool regression_coefficient = false;  // least-squares c* per batch instead of 1
    bool parallel_batches = true;
};

struct McResult {
    double price = 0.0;
    double std_error = 0.0;           // across-batch stdev of batch means / sqrt(batches)
    std::vector<double> batch_means;  // in batch order
};

struct TerminalSample {
    double basket;     // S(T)
    double expansion;  // S_c(T), driven by the same increments and jumps
};

// Euler scheme on asset levels, all assets sharing one jump stream. The
// first-order expansion process is accumulated from the same Brownian
// increments and jump draws, which is what makes it a control variate.
// Not thread-safe: one simulator per worker.
class TerminalSimulator {
public:
    TerminalSimulator(const BasketModel& model, double maturity, int steps)
        : model_(model), factor_(validate(model)), maturity_(maturity), steps_(std::max(steps, 1)) {
        if (!(maturity > 0.0))
            throw std::invalid_argument("TerminalSimulator: maturity must be > 0");
        const std::size_t n = model.n();
        dt_ = maturity_ / steps_;
        sqrt_dt_ = std::sqrt(dt_);
        jump_mean_ = model.jump.mean_relative_jump();
        drift_dt_ = (model.rate - model.lambda * jump_mean_) * dt_;
        lambda_dt_ = model.lambda * dt_;
        spot0_ = basket_spot(model);
        level0_.resize(n);
        for (std::size_t i = 0; i < n; ++i) level0_[i] = model.vols[i].level(0.0, model.spots[i]);
        comp_ = -model.lambda * model.jump.eta() * maturity_;
        state_.resize(n);
        wiener_.resize(n);
        raw_.resize(n);
        mixed_.resize(n);
    }

    TerminalSample sample(PathRng& rng) {
        const std::size_t n = model_.n();
        const double eta = model_.jump.eta();
        const double gamma = model_.jump.gamma();
        const bool constant_jump = model_.jump.is_constant() || gamma == 0.0;

        std::copy(model_.spots.begin(), model_.spots.end(), state_.begin());
        std::fill(wiener_.begin(), wiener_.end(), 0.0);
        double jump_log_sum = 0.0;

        for (int step = 0; step < steps_; ++step) {
            const double t = step * dt_;
            for (std::size_t i = 0; i < n; ++i) raw_[i] = rng.normal();
            factor_.transform(raw_, mixed_);
            for (std::size_t i = 0; i < n; ++i) {
                const double level = model_.vols[i].level(t, state_[i]);
                state_[i] += state_[i] * drift_dt_ + level * sqrt_dt_ * mixed_[i];
                if (state_[i] < 0.0) state_[i] = 0.0;  // absorbing floor
                wiener_[i] += mixed_[i];
            }
            if (lambda_dt_ > 0.0) {
                const int count = rng.poisson(lambda_dt_);
                if (count > 0) {
                    const double log_jump = constant_jump
                                                ? count * eta
                                                : count * eta + std::sqrt(double(count)) * gamma *
                                                                    rng.normal();
                    const double factor = std::exp(log_jump);
                    for (std::size_t i = 0; i < n; ++i) state_[i] *= factor;
                    jump_log_sum += log_jump;
                }
            }
        }

        double basket = 0.0;
        double expansion = spot0_;
        for (std::size_t i = 0; i < n; ++i) {
            basket += model_.weights[i] * state_[i];
            expansion += model_.weights[i] * (comp_ * model_.spots[i] +
                                              level0_[i] * sqrt_dt_ * wiener_[i] +
                                              model_.spots[i] * jump_log_sum);
        }
        return {basket, expansion};
    }

    double maturity() const { return maturity_; }
    int steps() const { return steps_; }

private:
    BasketModel model_;
    CorrelationFactor factor_;
    double maturity_;
    int steps_;
    double dt_ = 0.0;
    double sqrt_dt_ = 0.0;
    double jump_mean_ = 0.0;
    double drift_dt_ = 0.0;
    double lambda_dt_ = 0.0;
    double spot0_ = 0.0;
    double comp_ = 0.0;
    std::vector<double> level0_;
    std::vector<double> state_;
    std::vector<double> wiener_;
    std::vector<double> raw_;
    std::vector<double> mixed_;
};

// One path of (S(T), S_c(T)) on the caller's stream.
inline TerminalSample simulate_terminal(const BasketModel& model, double maturity, int steps,
                                        PathRng& rng) {
    TerminalSimulator sim(model, maturity, steps);
    return sim.sample(rng);
}

namespace detail {

struct BatchAccumulator {
    double sum_x = 0.0;   // plain payoff
    double sum_y = 0.0;   // control payoff
    double sum_xy = 0.0;
    double sum_yy = 0.0;
    long count = 0;
};

inline double batch_mean(const BatchAccumulator& acc, const McConfig& cfg, double discount,
                         double cv_value) {
    const double n = static_cast<double>(acc.count);
    const double mean_x = acc.sum_x / n;
    if (!cfg.use_control_variate) return discount * mean_x;
    const double mean_y = acc.sum_y / n;
    double coeff = 1.0;
    if (cfg.regression_coefficient) {
        const double var_y = acc.sum_yy / n - mean_y * mean_y;
        const double cov_xy = acc.sum_xy / n - mean_x * mean_y;
        if (var_y > 0.0) coeff = cov_xy / var_y;
    }
    return discount * (mean_x - coeff * mean_y) + coeff * cv_value;
}

}  // namespace detail

// Benchmark Monte Carlo price. Deterministic for a fixed (seed, config):
// batch substreams are derived by a counter split and reduced in batch
// order, independent of the thread schedule.
inline McResult price_mc(const BasketModel& model, const OptionSpec& option, const McConfig& cfg) {
    if (cfg.paths < 1) throw std::invalid_argument("price_mc: paths must be >= 1");
    if (cfg.batches < 1) throw std::invalid_argument("price_mc: batches must be >= 1");
    if (cfg.steps_per_year < 1)
        throw std::invalid_argument("price_mc: steps_per_year must be >= 1");

    const int steps = std::max(1, static_cast<int>(std::ceil(
                                      option.maturity * cfg.steps_per_year - 1e-9)));
    const double discount = std::exp(-model.rate * option.maturity);
    const double strike = option.strike;
    const double cv_value = cfg.use_control_variate ? cv_price(model, option).price : 0.0;

    auto run_batch = [&](int batch) {
        PathRng rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(batch)));
        TerminalSimulator sim(model, option.maturity, steps);
        detail::BatchAccumulator acc;
        for (long p = 0; p < cfg.paths; ++p) {
            const TerminalSample s = sim.sample(rng);
            const double x = std::max(s.basket - strike, 0.0);
            acc.sum_x += x;
            if (cfg.use_control_variate) {
                const double y = std::max(s.expansion - strike, 0.0);
                acc.sum_y += y;
                if (cfg.regression_coefficient) {
                    acc.sum_xy += x * y;
                    acc.sum_yy += y * y;
                }
            }
        }
        acc.count = cfg.paths;
        return detail::batch_mean(acc, cfg, discount, cv_value);
    };

    McResult out;
    out.batch_means.resize(cfg.batches);
    if (cfg.parallel_batches && cfg.batches > 1) {
        std::vector<std::future<double>> futures;
        futures.reserve(cfg.batches);
        for (int b = 0; b < cfg.batches; ++b)
            futures.push_back(std::async(std::launch::async, run_batch, b));
        for (int b = 0; b < cfg.batches; ++b) out.batch_means[b] = futures[b].get();
    } else {
        for (int b = 0; b < cfg.batches; ++b) out.batch_means[b] = run_batch(b);
    }

    out.price = std::accumulate(out.batch_means.begin(), out.batch_means.end(), 0.0) /
                cfg.batches;
    if (cfg.batches > 1) {
        double ss = 0.0;
        for (double m : out.batch_means) ss += (m - out.price) * (m - out.price);
        out.std_error = std::sqrt(ss / (cfg.batches - 1)) / std::sqrt(double(cfg.batches));
    }
    return out;
}

}  // namespace basket
