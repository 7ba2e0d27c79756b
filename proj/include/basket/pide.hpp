#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "basket/expansion.hpp"
#include "basket/model.hpp"
#include "basket/numerics.hpp"

namespace basket {

class StabilityViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Enforced bound on dt * lambda * (1 + m), the explicit jump term's CFL-type
// number. Kept strictly inside the theoretical limit of 1.
inline constexpr double kJumpCflLimit = 0.9;

struct GridOverrides {
    std::optional<double> dt;
    std::optional<double> dx;
    std::optional<double> x_max;
    int layer_stride = 0;  // 0 = auto (bounded stored-layer count)
};

// Lattice in log-moneyness x = ln(K / S(0)) with a node pinned at x = 0,
// uniform in x and t.
struct PideGrid {
    double x_min = 0.0;
    double x_max = 0.0;
    double dx = 0.0;
    double dt = 0.0;
    double t_max = 0.0;
    int nx = 0;          // total nodes, boundaries included
    int nt = 0;
    int zero_index = 0;  // node with x = 0
    double spot0 = 0.0;
    std::vector<double> x;
    std::vector<double> strikes;  // S(0) e^x
};

inline PideGrid build_grid(const BasketModel& model, const OptionSpec& option,
                           const GridOverrides& overrides = {}) {
    validate(model);
    const double maturity = option.maturity;
    const double spot0 = basket_spot(model);
    const std::size_t n = model.n();

    // instantaneous basket level variance at t = 0
    double hat0_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            hat0_sq += model.weights[i] * model.weights[j] * model.corr[i][j] *
                       model.vols[i].level(0.0, model.spots[i]) *
                       model.vols[j].level(0.0, model.spots[j]);

    const double eta = model.jump.eta();
    const double gamma = model.jump.gamma();
    const double total_var =
        hat0_sq / (spot0 * spot0) * maturity + model.lambda * maturity * (eta * eta + gamma * gamma);
    const double sigma_tot = std::sqrt(std::max(total_var, 0.0));

    PideGrid grid;
    grid.spot0 = spot0;
    grid.t_max = maturity;
    grid.x_max = overrides.x_max.value_or(std::max(5.0 * sigma_tot, std::log(4.0)));
    if (!(grid.x_max > 0.0)) throw std::invalid_argument("build_grid: x_max must be > 0");
    grid.x_min = -grid.x_max;

    const double dx_target = overrides.dx.value_or(1.0 / 1024.0);
    if (!(dx_target > 0.0)) throw std::invalid_argument("build_grid: dx must be > 0");
    const int half = std::max(2, static_cast<int>(std::ceil(grid.x_max / dx_target - 1e-12)));
    grid.dx = grid.x_max / half;
    grid.nx = 2 * half + 1;
    grid.zero_index = half;

    const double jump_rate = model.lambda * (1.0 + model.jump.mean_relative_jump());
    const double dt_stable = jump_rate > 0.0 ? 0.5 / jump_rate
                                             : std::numeric_limits<double>::infinity();
    const double dt_req = overrides.dt.value_or(std::min(1.0 / 512.0, dt_stable));
    if (!(dt_req > 0.0)) throw std::invalid_argument("build_grid: dt must be > 0");
    if (jump_rate > 0.0 && dt_req * jump_rate >= kJumpCflLimit)
        throw StabilityViolation("build_grid: dt * lambda * (1 + m) exceeds the stability bound");
    grid.nt = std::max(1, static_cast<int>(std::ceil(maturity / dt_req - 1e-12)));
    grid.dt = maturity / grid.nt;

    grid.x.resize(grid.nx);
    grid.strikes.resize(grid.nx);
    for (int j = 0; j < grid.nx; ++j) {
        grid.x[j] = (j == grid.zero_index) ? 0.0 : grid.x_min + j * grid.dx;
        grid.strikes[j] = spot0 * std::exp(grid.x[j]);
    }
    return grid;
}

// Discrete weights of the jump integral lambda int u(x - y) e^y phi(y) dy on
// the x-lattice: (J u)_j = sum_l weights[l] u_{j - (shift_min + l)}.
// Normal densities are sampled by the midpoint rule over eta +- 8 gamma and
// renormalized so the total mass is exactly lambda (1 + m); a constant jump
// is a two-tap linear-interpolation stencil with the same exact mass.
struct JumpKernel {
    std::vector<double> weights;
    int shift_min = 0;
    double mass = 0.0;   // sum of weights = lambda * (1 + m)
    double drift = 0.0;  // lambda * m, the jump-compensator convection

    bool empty() const { return weights.empty(); }
};

inline JumpKernel build_kernel(const JumpSpec& jump, double lambda, const PideGrid& grid) {
    JumpKernel kernel;
    if (!(lambda >= 0.0)) throw std::invalid_argument("build_kernel: lambda must be >= 0");
    if (lambda == 0.0) return kernel;

    const double m = jump.mean_relative_jump();
    kernel.drift = lambda * m;

    const auto make_shift_stencil = [&](double y) {
        const double pos = y / grid.dx;
        const int base = static_cast<int>(std::floor(pos));
        const double frac = pos - base;
        kernel.shift_min = base;
        const double mass = lambda * std::exp(y);
        kernel.weights = {mass * (1.0 - frac), mass * frac};
        kernel.mass = mass;
    };

    if (jump.is_constant() || jump.gamma() == 0.0) {
        make_shift_stencil(jump.eta());
        return kernel;
    }

    const double eta = jump.eta();
    const double gamma = jump.gamma();
    const int l_min = static_cast<int>(std::floor((eta - 8.0 * gamma) / grid.dx));
    const int l_max = static_cast<int>(std::ceil((eta + 8.0 * gamma) / grid.dx));
    std::vector<double> raw(l_max - l_min + 1);
    double raw_sum = 0.0;
    for (int l = l_min; l <= l_max; ++l) {
        const double y = l * grid.dx;
        const double density = norm_pdf((y - eta) / gamma) / gamma;
        raw[l - l_min] = std::exp(y) * density * grid.dx;
        raw_sum += raw[l - l_min];
    }
    if (!(raw_sum > 1e-8 * (1.0 + m))) {
        // density narrower than the lattice can resolve; treat as a point mass
        make_shift_stencil(eta);
        return kernel;
    }
    const double target = lambda * (1.0 + m);
    const double scale = target / raw_sum;
    for (double& w : raw) w *= scale;
    kernel.weights = std::move(raw);
    kernel.shift_min = l_min;
    kernel.mass = target;
    return kernel;
}

// Off-grid data seen by the convolution and the Dirichlet rows.
// payoff_asymptotics is the production choice: S(0)(1 - e^x) below the grid,
// 0 above. discounted_forward extends S(0)(1 - e^x) on both sides, the
// configuration under which the scheme must hold the linear payoff still.
enum class BoundaryExtension { payoff_asymptotics, discounted_forward };

namespace detail {

inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

// Evaluates the jump convolution on the lattice. The off-grid tails reduce
// to prefix/suffix sums and are exact; the in-grid part is a linear
// convolution, run directly for short stencils and through a cached real
// FFT for wide ones.
class KernelApplier {
public:
    KernelApplier(const PideGrid& grid, const JumpKernel& kernel, bool use_fft,
                  BoundaryExtension extension = BoundaryExtension::payoff_asymptotics)
        : grid_(&grid),
          kernel_(&kernel),
          use_fft_(use_fft && kernel.weights.size() > 8),
          linear_above_(extension == BoundaryExtension::discounted_forward) {
        const std::size_t taps = kernel.weights.size();
        if (taps == 0) return;

        suffix_w_.assign(taps + 1, 0.0);
        suffix_we_.assign(taps + 1, 0.0);
        for (std::size_t l = taps; l-- > 0;) {
            const double y = (kernel.shift_min + static_cast<int>(l)) * grid.dx;
            suffix_w_[l] = suffix_w_[l + 1] + kernel.weights[l];
            suffix_we_[l] = suffix_we_[l + 1] + kernel.weights[l] * std::exp(-y);
        }
        prefix_w_.assign(taps + 1, 0.0);
        prefix_we_.assign(taps + 1, 0.0);
        for (std::size_t l = 0; l < taps; ++l) {
            const double y = (kernel.shift_min + static_cast<int>(l)) * grid.dx;
            prefix_w_[l + 1] = prefix_w_[l] + kernel.weights[l];
            prefix_we_[l + 1] = prefix_we_[l] + kernel.weights[l] * std::exp(-y);
        }

        if (!use_fft_) return;
        nfft_ = next_pow2(static_cast<std::size_t>(grid.nx) + taps);
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        real_ = fftw_alloc_real(nfft_);
        spec_ = fftw_alloc_complex(nfft_ / 2 + 1);
        kernel_spec_ = fftw_alloc_complex(nfft_ / 2 + 1);
        plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(nfft_), real_, spec_, FFTW_ESTIMATE);
        plan_bwd_ = fftw_plan_dft_c2r_1d(static_cast<int>(nfft_), spec_, real_, FFTW_ESTIMATE);

        std::fill(real_, real_ + nfft_, 0.0);
        std::copy(kernel.weights.begin(), kernel.weights.end(), real_);
        fftw_execute(plan_fwd_);
        std::memcpy(kernel_spec_, spec_, (nfft_ / 2 + 1) * sizeof(fftw_complex));
    }

    ~KernelApplier() {
        if (plan_fwd_ || plan_bwd_ || real_) {
            std::lock_guard<std::mutex> lock(fftw_plan_mutex());
            if (plan_fwd_) fftw_destroy_plan(plan_fwd_);
            if (plan_bwd_) fftw_destroy_plan(plan_bwd_);
            if (real_) fftw_free(real_);
            if (spec_) fftw_free(spec_);
            if (kernel_spec_) fftw_free(kernel_spec_);
        }
    }

    KernelApplier(const KernelApplier&) = delete;
    KernelApplier& operator=(const KernelApplier&) = delete;

    void apply(std::span<const double> u, std::span<double> out) {
        const int nx = grid_->nx;
        if (kernel_->empty()) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        const int taps = static_cast<int>(kernel_->weights.size());
        const int smin = kernel_->shift_min;
        const double spot0 = grid_->spot0;

        const double* conv = nullptr;
        if (use_fft_) {
            std::fill(real_, real_ + nfft_, 0.0);
            std::copy(u.begin(), u.end(), real_);
            fftw_execute(plan_fwd_);
            const double scale = 1.0 / static_cast<double>(nfft_);
            for (std::size_t i = 0; i < nfft_ / 2 + 1; ++i) {
                const double re = spec_[i][0] * kernel_spec_[i][0] - spec_[i][1] * kernel_spec_[i][1];
                const double im = spec_[i][0] * kernel_spec_[i][1] + spec_[i][1] * kernel_spec_[i][0];
                spec_[i][0] = re * scale;
                spec_[i][1] = im * scale;
            }
            fftw_execute(plan_bwd_);
            conv = real_;
        }

        for (int j = 0; j < nx; ++j) {
            // tail below the grid, exact via the suffix sums
            const int first_below = std::clamp(j - smin + 1, 0, taps);
            double acc = spot0 * (suffix_w_[first_below] -
                                  std::exp(grid_->x[j]) * suffix_we_[first_below]);
            if (linear_above_) {
                const int first_inside = std::clamp(j - smin - nx + 1, 0, taps);
                acc += spot0 * (prefix_w_[first_inside] -
                                std::exp(grid_->x[j]) * prefix_we_[first_inside]);
            }
            if (use_fft_) {
                const int m = j - smin;
                if (m >= 0 && m < nx + taps - 1) acc += conv[m];
            } else {
                const int l_lo = std::max(0, j - smin - nx + 1);
                const int l_hi = std::min(taps - 1, j - smin);
                if (l_lo <= l_hi) {
                    const double* w = kernel_->weights.data();
                    const int u_hi = j - smin - l_lo;  // in [0, nx)
                    for (int l = l_lo; l <= l_hi; ++l) acc += w[l] * u[u_hi - (l - l_lo)];
                }
            }
            out[j] = acc;
        }
    }

private:
    const PideGrid* grid_;
    const JumpKernel* kernel_;
    bool use_fft_ = false;
    bool linear_above_ = false;
    std::vector<double> suffix_w_;
    std::vector<double> suffix_we_;
    std::vector<double> prefix_w_;
    std::vector<double> prefix_we_;
    std::size_t nfft_ = 0;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_complex* kernel_spec_ = nullptr;
    fftw_plan plan_fwd_ = nullptr;
    fftw_plan plan_bwd_ = nullptr;
};

}  // namespace detail

// One IMEX step of the log-strike equation
//   u_T = (lambda m - sigma^2/2) u_x + (sigma^2/2) u_xx + (J u) - lambda(1+m) u.
// Convection, diffusion and the reaction term are implicit (tridiagonal
// solve); the jump convolution is explicit in u_prev. Central differencing
// for u_x switches to upwind where |lambda m - sigma^2/2| dx > sigma^2, so
// the system stays an M-matrix even where the variance is floored.
// sigma_sq holds sigma(T, K_j)^2 per node at the step's target time.
inline std::vector<double> step(const std::vector<double>& u_prev, const PideGrid& grid,
                                const JumpKernel& kernel, std::span<const double> sigma_sq,
                                detail::KernelApplier* applier = nullptr,
                                BoundaryExtension extension = BoundaryExtension::payoff_asymptotics) {
    const int nx = grid.nx;
    if (static_cast<int>(u_prev.size()) != nx || static_cast<int>(sigma_sq.size()) != nx)
        throw std::invalid_argument("step: row sizes do not match the grid");
    const double dt = grid.dt;
    const double dx = grid.dx;
    const double left_bc = grid.spot0 * (1.0 - std::exp(grid.x_min));
    const double right_bc = extension == BoundaryExtension::discounted_forward
                                ? grid.spot0 * (1.0 - std::exp(grid.x_max))
                                : 0.0;

    std::vector<double> conv(nx, 0.0);
    if (!kernel.empty()) {
        if (applier) {
            applier->apply(u_prev, conv);
        } else {
            detail::KernelApplier local(grid, kernel, false, extension);
            local.apply(u_prev, conv);
        }
    }

    const int interior = nx - 2;
    std::vector<double> sub(interior - 1), diag(interior), sup(interior - 1), rhs(interior);
    for (int j = 1; j <= interior; ++j) {
        const double var = std::max(sigma_sq[j], 0.0);
        const double diff = 0.5 * var;
        const double mu = kernel.drift - diff;

        double lo, mid, hi;  // coefficients of u_{j-1}, u_j, u_{j+1} in L
        if (std::abs(mu) * dx <= var || mu == 0.0) {
            lo = diff / (dx * dx) - mu / (2.0 * dx);
            mid = -2.0 * diff / (dx * dx) - kernel.mass;
            hi = diff / (dx * dx) + mu / (2.0 * dx);
        } else if (mu > 0.0) {
            lo = diff / (dx * dx);
            mid = -2.0 * diff / (dx * dx) - mu / dx - kernel.mass;
            hi = diff / (dx * dx) + mu / dx;
        } else {
            lo = diff / (dx * dx) - mu / dx;
            mid = -2.0 * diff / (dx * dx) + mu / dx - kernel.mass;
            hi = diff / (dx * dx);
        }

        const int row = j - 1;
        diag[row] = 1.0 - dt * mid;
        if (row > 0) sub[row - 1] = -dt * lo;
        if (row < interior - 1) sup[row] = -dt * hi;
        rhs[row] = u_prev[j] + dt * conv[j];
        if (j == 1) rhs[row] += dt * lo * left_bc;
        if (j == interior) rhs[row] += dt * hi * right_bc;
    }

    const std::vector<double> interior_next = solve_tridiagonal(sub, diag, sup, rhs);
    std::vector<double> u_next(nx);
    u_next[0] = left_bc;
    u_next[nx - 1] = right_bc;
    std::copy(interior_next.begin(), interior_next.end(), u_next.begin() + 1);
    return u_next;
}

// sigma(T, K)^2 used by the solver; the AE surface supplies the production
// one, oracle tests pass closed-form variances directly.
using VarianceFn = std::function<double(double maturity, double strike)>;

struct PideSolution {
    PideGrid grid;
    std::vector<double> layer_times;
    std::vector<std::vector<double>> layers;
    std::uint64_t model_fingerprint = 0;

    double price_at(double maturity, double strike) const {
        if (!(strike > 0.0)) throw std::invalid_argument("price_at: strike must be > 0");
        const double spot0 = grid.spot0;
        if (maturity <= 0.0) return std::max(spot0 - strike, 0.0);
        const double t = std::min(maturity, layer_times.back());

        std::size_t lo = 0;
        std::size_t hi = layer_times.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (layer_times[mid] <= t ? lo : hi) = mid;
        }
        const double v_lo = layer_value(lo, strike);
        if (layer_times[hi] == layer_times[lo]) return v_lo;
        const double v_hi = layer_value(hi, strike);
        const double w = (t - layer_times[lo]) / (layer_times[hi] - layer_times[lo]);
        return v_lo + std::clamp(w, 0.0, 1.0) * (v_hi - v_lo);
    }

private:
    double layer_value(std::size_t layer, double strike) const {
        const double x = std::log(strike / grid.spot0);
        if (x <= grid.x_min) return grid.spot0 - strike;  // deep ITM asymptote at r = 0
        if (x >= grid.x_max) return 0.0;
        const MonotoneCubic interp(grid.x, layers[layer]);
        return interp(x);
    }
};

namespace detail {

inline std::uint64_t fingerprint(const BasketModel& model, const PideGrid& grid) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (double s : model.spots) hash_mix(h, s);
    for (double w : model.weights) hash_mix(h, w);
    for (const auto& row : model.corr)
        for (double r : row) hash_mix(h, r);
    for (const auto& vol : model.vols) {
        hash_mix(h, vol.alpha());
        hash_mix(h, vol.beta());
    }
    hash_mix(h, model.jump.eta());
    hash_mix(h, model.jump.gamma());
    hash_mix(h, static_cast<std::uint64_t>(model.jump.is_constant()));
    hash_mix(h, model.lambda);
    hash_mix(h, model.rate);
    hash_mix(h, grid.dx);
    hash_mix(h, grid.dt);
    hash_mix(h, grid.x_max);
    hash_mix(h, static_cast<std::uint64_t>(grid.nx));
    hash_mix(h, static_cast<std::uint64_t>(grid.nt));
    return h;
}

}  // namespace detail

// Marches the payoff layer to t_max, storing every layer_stride-th layer
// (auto: a power of two keeping at most ~256 stored layers, which also keeps
// the paper maturities on stored steps).
inline PideSolution solve(const BasketModel& model, const VarianceFn& variance, double t_max,
                          const PideGrid& grid, int layer_stride = 0) {
    if (!(t_max > 0.0)) throw std::invalid_argument("solve: t_max must be > 0");
    if (std::abs(t_max - grid.t_max) > 1e-9 * std::max(1.0, grid.t_max))
        throw std::invalid_argument("solve: grid was built for a different horizon");

    int stride = layer_stride;
    if (stride <= 0) {
        stride = 1;
        while (grid.nt / stride > 256) stride *= 2;
    }

    const JumpKernel kernel = build_kernel(model.jump, model.lambda, grid);
    detail::KernelApplier applier(grid, kernel, true);

    PideSolution solution;
    solution.grid = grid;
    solution.model_fingerprint = detail::fingerprint(model, grid);

    std::vector<double> u(grid.nx);
    for (int j = 0; j < grid.nx; ++j)
        u[j] = grid.spot0 * std::max(1.0 - std::exp(grid.x[j]), 0.0);
    solution.layer_times.push_back(0.0);
    solution.layers.push_back(u);

    std::vector<double> sigma_sq(grid.nx);
    for (int n = 0; n < grid.nt; ++n) {
        const double t_next = (n + 1) * grid.dt;
        for (int j = 0; j < grid.nx; ++j) sigma_sq[j] = variance(t_next, grid.strikes[j]);
        u = step(u, grid, kernel, sigma_sq, &applier);
        if ((n + 1) % stride == 0 || n + 1 == grid.nt) {
            solution.layer_times.push_back(t_next);
            solution.layers.push_back(u);
        }
    }
    return solution;
}

inline PideSolution solve(const BasketModel& model, const LocalVolSurface& surface, double t_max,
                          const PideGrid& grid, int layer_stride = 0) {
    return solve(
        model,
        [&surface](double maturity, double strike) { return surface.sigma_sq(maturity, strike); },
        t_max, grid, layer_stride);
}

inline double price_at(const PideSolution& solution, double maturity, double strike) {
    return solution.price_at(maturity, strike);
}

}  // namespace basket
