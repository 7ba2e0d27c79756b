#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "basket/analytic.hpp"
#include "basket/model.hpp"
#include "support.hpp"

using namespace basket;
using Catch::Approx;

using testsupport::normal_call_quadrature;

TEST_CASE("normal_call: at-the-money closed form") {
    for (double sigma : {0.5, 3.0, 13.784}) {
        REQUIRE(normal_call(100.0, sigma, 100.0) ==
                Approx(sigma / std::sqrt(2.0 * kPi)).epsilon(1e-14));
    }
}

TEST_CASE("normal_call: degenerate distribution") {
    REQUIRE(normal_call(102.4, 0.0, 100.0) == Approx(2.4).margin(1e-14));
    REQUIRE(normal_call(95.0, 0.0, 100.0) == 0.0);
}

TEST_CASE("normal_call: matches quadrature on the documented point") {
    const double value = normal_call(102.4, 13.784, 100.0);
    REQUIRE(value == Approx(normal_call_quadrature(102.4, 13.784, 100.0)).margin(1e-10));
    REQUIRE(value == Approx(6.7825).margin(1e-3));
}

TEST_CASE("normal_call: random triples against adaptive quadrature") {
    std::mt19937 rng(515);
    std::uniform_real_distribution<double> mean(50.0, 150.0);
    std::uniform_real_distribution<double> stdev(0.01, 60.0);
    std::uniform_real_distribution<double> strike(20.0, 180.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double mu = mean(rng);
        const double sigma = stdev(rng);
        const double k = strike(rng);
        REQUIRE(normal_call(mu, sigma, k) ==
                Approx(normal_call_quadrature(mu, sigma, k)).margin(1e-10));
    }
}

TEST_CASE("normal_call: rejects negative sigma") {
    REQUIRE_THROWS_AS(normal_call(100.0, -1.0, 100.0), std::invalid_argument);
}

TEST_CASE("cv_price: reference basket values") {
    SECTION("alpha = 0.2") {
        const CvPrice cv = cv_price(testsupport::table1_base_model(), OptionSpec(100.0, 1.0));
        REQUIRE(cv.price == Approx(8.31).margin(0.005));
    }
    SECTION("alpha = 0.1") {
        auto model = testsupport::make_basket(4, 0.3, 0.1, 1.0, JumpSpec::normal(-0.08, 0.35), 0.3);
        const CvPrice cv = cv_price(model, OptionSpec(100.0, 1.0));
        REQUIRE(cv.price == Approx(6.14).margin(0.005));
    }
}

TEST_CASE("cv_price: price equals the weighted sum of its terms") {
    const CvPrice cv = cv_price(testsupport::table1_base_model(), OptionSpec(100.0, 1.0));
    double acc = 0.0;
    for (const auto& term : cv.terms) acc += term.weight * term.value;
    REQUIRE(cv.price == Approx(acc).epsilon(1e-14));
    REQUIRE(cv.price >= 0.0);
}

TEST_CASE("cv_price: single-term case without jumps matches quadrature") {
    auto model = testsupport::make_basket(4, 0.3, 0.1, 1.0, JumpSpec::normal(-0.08, 0.35), 0.0);
    const CvPrice cv = cv_price(model, OptionSpec(100.0, 1.0));
    REQUIRE(cv.terms.size() == 1);
    const double sigma = std::sqrt(0.475 * 100.0);  // equicorrelated weighted level variance
    REQUIRE(cv.price == Approx(normal_call_quadrature(100.0, sigma, 100.0)).margin(1e-10));
}

TEST_CASE("cv_price: collapses to the zero-jump normal call as lambda -> 0") {
    auto base = testsupport::make_basket(4, 0.3, 0.2, 1.0, JumpSpec::normal(-0.08, 0.35), 0.0);
    const double no_jump = cv_price(base, OptionSpec(100.0, 1.0)).price;
    double prev_gap = 1e9;
    for (double lambda : {0.1, 0.01, 0.001, 1e-4}) {
        auto model = base;
        model.lambda = lambda;
        const double gap = std::abs(cv_price(model, OptionSpec(100.0, 1.0)).price - no_jump);
        REQUIRE(gap < prev_gap);
        prev_gap = gap;
    }
    REQUIRE(prev_gap < 2e-3);
}

TEST_CASE("cv_price: call-put parity of the mixture") {
    auto model = testsupport::table1_base_model();
    for (double strike : {80.0, 100.0, 120.0}) {
        const OptionSpec option(strike, 1.0);
        const auto weights = poisson_weights(model.lambda, option.maturity);
        const ConditionalMoments cm =
            conditional_moments(model, option.maturity, static_cast<int>(weights.size()) - 1);
        double parity = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            const double sigma = std::sqrt(cm.variance[k]);
            const double call = normal_call(cm.mean[k], sigma, strike);
            const double put = call - (cm.mean[k] - strike);
            parity += weights[k] * (call - put);
        }
        REQUIRE(parity == Approx(basket_spot(model) - strike).margin(1e-8));
    }
}

TEST_CASE("cv_price: nonincreasing and convex in strike") {
    auto model = testsupport::table1_base_model();
    std::vector<double> prices;
    for (double strike = 40.0; strike <= 200.0; strike += 5.0)
        prices.push_back(cv_price(model, OptionSpec(strike, 1.0)).price);
    for (std::size_t i = 1; i < prices.size(); ++i) REQUIRE(prices[i] <= prices[i - 1] + 1e-12);
    for (std::size_t i = 1; i + 1 < prices.size(); ++i)
        REQUIRE(prices[i + 1] - 2.0 * prices[i] + prices[i - 1] >= -1e-10);
}

TEST_CASE("cv_price: constant jump variants") {
    // constant log-size enters the moments with gamma = 0
    auto model = testsupport::make_basket(4, 0.3, 0.2, 1.0, JumpSpec::constant(-0.25), 0.3);
    const CvPrice cv = cv_price(model, OptionSpec(100.0, 1.0));
    REQUIRE(cv.price > 0.0);
    for (const auto& term : cv.terms) {
        REQUIRE(term.weight >= 0.0);
        REQUIRE(term.value >= 0.0);
    }
}
