#pragma once

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <semaphore>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "basket/analytic.hpp"
#include "basket/config.hpp"
#include "basket/montecarlo.hpp"
#include "basket/pide.hpp"

namespace basket {

enum class Method { mc, ae, cv };

inline Method parse_method(const std::string& name) {
    if (name == "mc") return Method::mc;
    if (name == "ae") return Method::ae;
    if (name == "cv") return Method::cv;
    throw ConfigError("method must be one of mc, ae, cv");
}

inline const char* method_name(Method m) {
    switch (m) {
        case Method::mc: return "mc";
        case Method::ae: return "ae";
        default: return "cv";
    }
}

// Full approximate-local-volatility pipeline: coefficient surface on the
// solver's time levels, one forward sweep, prices read at the requested
// maturities (ascending).
inline std::vector<double> ae_prices(const BasketModel& model, double strike,
                                     const std::vector<double>& maturities,
                                     const GridOverrides& overrides = {}) {
    if (maturities.empty()) return {};
    const double t_max = *std::max_element(maturities.begin(), maturities.end());
    const PideGrid grid = build_grid(model, OptionSpec(strike, t_max), overrides);
    std::vector<double> levels(grid.nt);
    for (int n = 0; n < grid.nt; ++n) levels[n] = (n + 1) * grid.dt;
    const LocalVolSurface surface = LocalVolSurface::build(model, std::move(levels));
    const PideSolution solution = solve(model, surface, t_max, grid, overrides.layer_stride);
    std::vector<double> prices;
    prices.reserve(maturities.size());
    for (double t : maturities) prices.push_back(solution.price_at(t, strike));
    return prices;
}

struct PriceResult {
    std::string method;
    double maturity = 0.0;
    double strike = 0.0;
    double price = 0.0;
    double std_error = 0.0;  // Monte Carlo only
    nlohmann::json provenance;
};

inline std::vector<PriceResult> run_price(const RunConfig& cfg, Method method) {
    std::vector<PriceResult> out;
    std::vector<double> sorted = cfg.maturities;
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> ae;
    if (method == Method::ae) ae = ae_prices(cfg.model, cfg.strike, sorted, cfg.pide);

    for (std::size_t i = 0; i < sorted.size(); ++i) {
        PriceResult res;
        res.method = method_name(method);
        res.maturity = sorted[i];
        res.strike = cfg.strike;
        switch (method) {
            case Method::mc: {
                const McResult mc = price_mc(cfg.model, OptionSpec(cfg.strike, sorted[i]), cfg.mc);
                res.price = mc.price;
                res.std_error = mc.std_error;
                break;
            }
            case Method::ae:
                res.price = ae[i];
                break;
            case Method::cv:
                res.price = cv_price(cfg.model, OptionSpec(cfg.strike, sorted[i])).price;
                break;
        }
        res.provenance = cfg.resolved;
        res.provenance["method"] = res.method;
        out.push_back(std::move(res));
    }
    return out;
}

// ---------------------------------------------------------------------------
// comparison tables

enum class TableScale { desk, paper, smoke };

inline TableScale parse_scale(const std::string& name) {
    if (name == "desk") return TableScale::desk;
    if (name == "paper") return TableScale::paper;
    if (name == "smoke") return TableScale::smoke;
    throw ConfigError("scale must be one of desk, paper, smoke");
}

struct TableRow {
    int table_id = 0;
    double maturity = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double lambda = 0.0;
    double jump_mean = 0.0;  // m
    double mc_price = 0.0;
    double mc_stderr = 0.0;
    double ae_price = 0.0;
    double cv_price = 0.0;
    bool ok = true;
    std::string error;
};

struct TableScenario {
    double maturity;
    double alpha;
    double beta;
    double lambda;
    JumpSpec jump = JumpSpec::normal(0.0, 0.0);
};

// n = 4, w = 1/4, rho = 0.3, S_i(0) = 100, r = 0, K = 100 throughout.
inline BasketModel table_model(double alpha, double beta, const JumpSpec& jump, double lambda) {
    BasketModel model;
    model.spots.assign(4, 100.0);
    model.weights.assign(4, 0.25);
    model.corr.assign(4, std::vector<double>(4, 0.3));
    for (int i = 0; i < 4; ++i) model.corr[i][i] = 1.0;
    for (int i = 0; i < 4; ++i) model.vols.emplace_back(alpha, beta);
    model.jump = jump;
    model.lambda = lambda;
    return model;
}

inline std::vector<TableScenario> table_scenarios(int table_id) {
    std::vector<TableScenario> rows;
    if (table_id == 1 || table_id == 2) {
        const double eta = table_id == 1 ? -0.08 : -0.3;
        const JumpSpec jump = JumpSpec::normal(eta, 0.35);
        for (double maturity : {1.0, 3.0})
            for (double beta : {1.0, 0.8, 0.5})
                for (double alpha : {0.1, 0.2, 0.5})
                    for (double lambda : {0.3, 1.0})
                        rows.push_back({maturity, alpha, beta, lambda, jump});
    } else if (table_id == 3 || table_id == 4) {
        const double alpha = table_id == 3 ? 0.2 : 0.5;
        for (double lambda : {0.3, 1.0})
            for (double y : {-0.25, -0.125, -0.0625})
                for (double maturity : {1.0, 3.0})
                    rows.push_back({maturity, alpha, 1.0, lambda, JumpSpec::constant(y)});
    } else {
        throw ConfigError("table id must be 1, 2, 3 or 4");
    }
    return rows;
}

inline McConfig table_mc_config(TableScale scale, double maturity, std::uint64_t seed) {
    McConfig cfg;
    cfg.seed = seed;
    cfg.parallel_batches = false;  // rows already run on the worker pool
    switch (scale) {
        case TableScale::desk:
            cfg.paths = 30000;
            cfg.batches = 4;
            break;
        case TableScale::paper:
            cfg.paths = maturity < 2.0 ? 30000 : 100000;
            cfg.batches = 10;
            break;
        case TableScale::smoke:
            cfg.paths = 2000;
            cfg.batches = 2;
            cfg.steps_per_year = 64;
            break;
    }
    return cfg;
}

inline GridOverrides table_grid_overrides(TableScale scale) {
    GridOverrides ov;
    if (scale == TableScale::smoke) {
        ov.dx = 1.0 / 128.0;
        ov.dt = 1.0 / 128.0;
    }
    return ov;
}

inline TableRow run_table_row(int table_id, const TableScenario& sc, TableScale scale,
                              std::uint64_t row_seed) {
    TableRow row;
    row.table_id = table_id;
    row.maturity = sc.maturity;
    row.alpha = sc.alpha;
    row.beta = sc.beta;
    row.lambda = sc.lambda;
    row.jump_mean = sc.jump.mean_relative_jump();
    try {
        const BasketModel model = table_model(sc.alpha, sc.beta, sc.jump, sc.lambda);
        const OptionSpec option(100.0, sc.maturity);
        const McResult mc = price_mc(model, option, table_mc_config(scale, sc.maturity, row_seed));
        row.mc_price = mc.price;
        row.mc_stderr = mc.std_error;
        row.ae_price = ae_prices(model, option.strike, {sc.maturity},
                                 table_grid_overrides(scale))[0];
        row.cv_price = basket::cv_price(model, option).price;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
    return row;
}

inline std::vector<TableRow> run_table(int table_id, TableScale scale, std::uint64_t seed,
                                       int threads = 0) {
    const std::vector<TableScenario> scenarios = table_scenarios(table_id);
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(scenarios.size())));

    std::vector<TableRow> rows(scenarios.size());
    std::counting_semaphore<256> slots(threads);
    std::vector<std::future<void>> futures;
    futures.reserve(scenarios.size());
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        slots.acquire();
        futures.push_back(std::async(std::launch::async, [&, i] {
            rows[i] = run_table_row(table_id, scenarios[i], scale, stream_seed(seed, i));
            slots.release();
        }));
    }
    for (auto& f : futures) f.get();
    return rows;
}

// relative percentage error vs the Monte Carlo benchmark, rounded half-even
// to one decimal (the tables' convention)
inline double relative_error_pct(double price, double mc_price) {
    return std::nearbyint(std::abs(price - mc_price) / mc_price * 1000.0) / 10.0;
}

namespace detail {

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

}  // namespace detail

inline void write_table_csv(const std::vector<TableRow>& rows, std::ostream& out) {
    out << "table_id,T,alpha,beta,lambda,m,mc_price,mc_stderr,ae_price,ae_err_pct,cv_price,"
           "cv_err_pct\n";
    double sum_stderr = 0.0, sum_ae = 0.0, sum_cv = 0.0;
    int count = 0;
    int table_id = rows.empty() ? 0 : rows.front().table_id;
    for (const auto& row : rows) {
        if (!row.ok) {
            out << row.table_id << ',' << detail::format_fixed(row.maturity, 2) << ','
                << detail::format_fixed(row.alpha, 2) << ',' << detail::format_fixed(row.beta, 2)
                << ',' << detail::format_fixed(row.lambda, 2) << ','
                << detail::format_fixed(row.jump_mean, 4) << ",,,,,,\n";
            out << "# row_error T=" << detail::format_fixed(row.maturity, 2)
                << " alpha=" << detail::format_fixed(row.alpha, 2) << ": " << row.error << "\n";
            continue;
        }
        const double ae_err = relative_error_pct(row.ae_price, row.mc_price);
        const double cv_err = relative_error_pct(row.cv_price, row.mc_price);
        out << row.table_id << ',' << detail::format_fixed(row.maturity, 2) << ','
            << detail::format_fixed(row.alpha, 2) << ',' << detail::format_fixed(row.beta, 2) << ','
            << detail::format_fixed(row.lambda, 2) << ',' << detail::format_fixed(row.jump_mean, 4)
            << ',' << detail::format_fixed(row.mc_price, 6) << ','
            << detail::format_fixed(row.mc_stderr, 6) << ','
            << detail::format_fixed(row.ae_price, 6) << ',' << detail::format_fixed(ae_err, 1)
            << ',' << detail::format_fixed(row.cv_price, 6) << ','
            << detail::format_fixed(cv_err, 1) << '\n';
        sum_stderr += row.mc_stderr;
        sum_ae += ae_err;
        sum_cv += cv_err;
        ++count;
    }
    if (count > 0) {
        out << table_id << ",average,,,,,," << detail::format_fixed(sum_stderr / count, 6) << ",,"
            << detail::format_fixed(std::nearbyint(sum_ae / count * 10.0) / 10.0, 1) << ",,"
            << detail::format_fixed(std::nearbyint(sum_cv / count * 10.0) / 10.0, 1) << '\n';
    }
    if (table_id == 3 || table_id == 4)
        out << "# pea: out of scope (not reproduced by this implementation)\n";
}

// ---------------------------------------------------------------------------
// static vector plots

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            const std::vector<PlotSeries>& series) {
    static const char* colors[] = {"#1f6fb2", "#c44e52", "#55a868", "#8172b2"};
    const double width = 760, height = 480, margin = 64;

    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
    if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
    const double y_pad = 0.05 * (y_hi - y_lo);
    y_lo -= y_pad;
    y_hi += y_pad;

    const auto px = [&](double x) { return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin); };
    const auto py = [&](double y) { return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin); };

    std::ofstream out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";

    // axes with a handful of ticks
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = x_lo + (x_hi - x_lo) * i / 5.0;
        const double fy = y_lo + (y_hi - y_lo) * i / 5.0;
        out << "<text x=\"" << px(fx) << "\" y=\"" << height - margin + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">" << detail::format_fixed(fx, 2)
            << "</text>\n"
            << "<text x=\"" << margin - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << detail::format_fixed(fy, 2)
            << "</text>\n";
    }
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n"
        << "<text x=\"18\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << height / 2
        << ")\">" << y_label << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[s % 4]
            << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[s].points) out << px(x) << ',' << py(y) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << width - margin - 8 << "\" y=\"" << margin + 18 * (s + 1)
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << colors[s % 4] << "\">"
            << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
}

inline void write_table_plots(int table_id, TableScale scale, const std::string& dir,
                              std::uint64_t seed) {
    const TableScenario base = table_scenarios(table_id).front();
    const BasketModel model = table_model(base.alpha, base.beta, base.jump, base.lambda);
    const GridOverrides ov = table_grid_overrides(scale);
    const double maturity = 1.0;

    const PideGrid grid = build_grid(model, OptionSpec(100.0, maturity), ov);
    std::vector<double> levels(grid.nt);
    for (int n = 0; n < grid.nt; ++n) levels[n] = (n + 1) * grid.dt;
    const LocalVolSurface surface = LocalVolSurface::build(model, std::move(levels));
    const PideSolution solution = solve(model, surface, maturity, grid, ov.layer_stride);

    PlotSeries ae{"AE", {}};
    PlotSeries cv{"CV", {}};
    PlotSeries vol{"sigma(1, K)", {}};
    for (double strike = 60.0; strike <= 140.0 + 1e-9; strike += 2.0) {
        ae.points.emplace_back(strike, solution.price_at(maturity, strike));
        cv.points.emplace_back(strike,
                               basket::cv_price(model, OptionSpec(strike, maturity)).price);
        vol.points.emplace_back(strike, surface.sigma(maturity, strike));
    }
    const std::string prefix = dir + "/table" + std::to_string(table_id) + "_";
    write_svg_chart(prefix + "price_vs_strike.svg",
                    "Basket call price, T = 1 (base scenario)", "strike", "price", {ae, cv});
    write_svg_chart(prefix + "local_vol.svg", "Approximate local volatility, T = 1", "strike",
                    "sigma", {vol});

    const McResult mc =
        price_mc(model, OptionSpec(100.0, maturity), table_mc_config(scale, maturity, seed));
    PlotSeries conv{"running mean", {}};
    double acc = 0.0;
    for (std::size_t b = 0; b < mc.batch_means.size(); ++b) {
        acc += mc.batch_means[b];
        conv.points.emplace_back(double(b + 1), acc / double(b + 1));
    }
    write_svg_chart(prefix + "mc_convergence.svg", "Monte Carlo running mean (base scenario)",
                    "batches", "price", {conv});
}

inline void run_table_to_dir(int table_id, TableScale scale, const std::string& dir, bool plots,
                             std::uint64_t seed, int threads = 0) {
    std::filesystem::create_directories(dir);
    const std::vector<TableRow> rows = run_table(table_id, scale, seed, threads);
    std::ofstream out(dir + "/table" + std::to_string(table_id) + ".csv");
    if (!out) throw std::runtime_error("cannot write table CSV in " + dir);
    write_table_csv(rows, out);
    if (plots) write_table_plots(table_id, scale, dir, seed);
}

// ---------------------------------------------------------------------------
// local-volatility surface dump: coefficient section, then a sampled slice

inline void write_vol_surface_csv(const BasketModel& model, double strike, double t_max,
                                  const GridOverrides& overrides, std::ostream& out) {
    const PideGrid grid = build_grid(model, OptionSpec(strike, t_max), overrides);
    std::vector<double> levels(grid.nt);
    for (int n = 0; n < grid.nt; ++n) levels[n] = (n + 1) * grid.dt;
    const LocalVolSurface surface = LocalVolSurface::build(model, levels);

    out << "T,a,b,c\n";
    const std::size_t stride = std::max<std::size_t>(1, levels.size() / 64);
    for (std::size_t i = 0; i < levels.size(); i += stride) {
        const AbcCoeffs abc = surface.coeffs_at(levels[i]);
        out << detail::format_fixed(levels[i], 6) << ',' << detail::format_fixed(abc.a, 8) << ','
            << detail::format_fixed(abc.b, 8) << ',' << detail::format_fixed(abc.c, 8) << '\n';
    }

    out << "\nT,K,sigma\n";
    const double spot0 = basket_spot(model);
    std::vector<double> slice_times;
    const std::size_t t_stride = std::max<std::size_t>(1, levels.size() / 8);
    for (std::size_t i = t_stride - 1; i < levels.size(); i += t_stride)
        slice_times.push_back(levels[i]);
    if (slice_times.empty() || slice_times.back() != levels.back())
        slice_times.push_back(levels.back());
    for (double t : slice_times)
        for (double k = 0.5; k <= 1.5 + 1e-9; k += 0.05) {
            const double strike_k = k * spot0;
            out << detail::format_fixed(t, 6) << ',' << detail::format_fixed(strike_k, 4) << ','
                << detail::format_fixed(surface.sigma(t, strike_k), 8) << '\n';
        }
}

}  // namespace basket
