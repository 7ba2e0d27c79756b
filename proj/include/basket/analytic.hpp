#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "basket/expansion.hpp"
#include "basket/model.hpp"
#include "basket/numerics.hpp"

namespace basket {

// E[(X - K)^+] for X ~ Normal(mu, sigma^2); sigma = 0 degenerates to the
// intrinsic value.
inline double normal_call(double mu, double sigma, double strike) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("normal_call: sigma must be >= 0");
    if (sigma == 0.0) return std::max(mu - strike, 0.0);
    const double d = (mu - strike) / sigma;
    return sigma * norm_pdf(d) + (mu - strike) * norm_cdf(d);
}

struct CvTerm {
    int count;      // jump count k
    double weight;  // P(N(T) = k)
    double value;   // E[(S_c(T, k) - K)^+]
};

struct CvPrice {
    double price = 0.0;
    std::vector<CvTerm> terms;
};

// Closed-form control-variate price: Poisson mixture of normal call
// expectations on the first-order expansion of the basket. The experiments
// run at r = 0; for nonzero rates the mixture is discounted.
inline CvPrice cv_price(const BasketModel& model, const OptionSpec& option,
                        double tail_tol = kPoissonTailTol) {
    const std::vector<double> weights = poisson_weights(model.lambda, option.maturity, tail_tol);
    const int k_max = static_cast<int>(weights.size()) - 1;
    const ConditionalMoments cm = conditional_moments(model, option.maturity, k_max);

    CvPrice out;
    out.terms.reserve(weights.size());
    double acc = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        const double sigma = std::sqrt(std::max(cm.variance[k], 0.0));
        const double value = normal_call(cm.mean[k], sigma, option.strike);
        acc += weights[k] * value;
        out.terms.push_back({k, weights[k], value});
    }
    out.price = acc * std::exp(-model.rate * option.maturity);
    return out;
}

}  // namespace basket
