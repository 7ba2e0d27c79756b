// Command-line front end: single prices (mc | ae | cv), reproduction of the
// comparison tables, and local-volatility surface dumps.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "basket/config.hpp"
#include "basket/tables.hpp"

namespace {

int env_threads() {
    if (const char* raw = std::getenv("BASKET_THREADS")) {
        const int n = std::atoi(raw);
        if (n > 0) return n;
    }
    return 0;  // auto
}

void write_price_csv(const std::string& path, const std::vector<basket::PriceResult>& results) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "method,T,K,price,std_error\n";
    for (const auto& r : results)
        out << r.method << ',' << basket::detail::format_fixed(r.maturity, 6) << ','
            << basket::detail::format_fixed(r.strike, 6) << ','
            << basket::detail::format_fixed(r.price, 6) << ','
            << basket::detail::format_fixed(r.std_error, 6) << '\n';
}

void write_price_plots(const basket::RunConfig& cfg, const std::string& csv_path) {
    const double maturity = *std::max_element(cfg.maturities.begin(), cfg.maturities.end());
    const basket::PideGrid grid =
        basket::build_grid(cfg.model, basket::OptionSpec(cfg.strike, maturity), cfg.pide);
    std::vector<double> levels(grid.nt);
    for (int n = 0; n < grid.nt; ++n) levels[n] = (n + 1) * grid.dt;
    const basket::LocalVolSurface surface = basket::LocalVolSurface::build(cfg.model, levels);
    const basket::PideSolution solution =
        basket::solve(cfg.model, surface, maturity, grid, cfg.pide.layer_stride);

    basket::PlotSeries price{"AE", {}};
    basket::PlotSeries vol{"sigma", {}};
    const double spot0 = basket::basket_spot(cfg.model);
    for (double k = 0.6; k <= 1.4 + 1e-9; k += 0.02) {
        price.points.emplace_back(k * spot0, solution.price_at(maturity, k * spot0));
        vol.points.emplace_back(k * spot0, surface.sigma(maturity, k * spot0));
    }
    const std::string base =
        csv_path.empty() ? "basket_price" : std::filesystem::path(csv_path).stem().string();
    const std::string dir =
        csv_path.empty() ? "." : std::filesystem::path(csv_path).parent_path().string();
    const std::string prefix = (dir.empty() ? std::string(".") : dir) + "/" + base;
    basket::write_svg_chart(prefix + "_price_vs_strike.svg", "Basket call price", "strike",
                            "price", {price});
    basket::write_svg_chart(prefix + "_local_vol.svg", "Approximate local volatility", "strike",
                            "sigma", {vol});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Basket option pricer: local-volatility jump-diffusion basket calls"};
    app.require_subcommand(1);

    std::string config_path;
    std::string method_name = "ae";
    auto* price_cmd = app.add_subcommand("price", "Price one configuration");
    price_cmd->add_option("--config", config_path, "JSON run configuration")->required();
    price_cmd->add_option("--method", method_name, "mc | ae | cv")->required();

    int table_id = 1;
    std::string scale_name = "desk";
    std::string out_dir = ".";
    bool plots = false;
    std::uint64_t table_seed = 0x5EEDBA5E2024ull;
    auto* table_cmd = app.add_subcommand("table", "Reproduce a comparison table");
    table_cmd->add_option("--id", table_id, "table number (1-4)")->required();
    table_cmd->add_option("--scale", scale_name, "desk | paper | smoke");
    table_cmd->add_option("--out", out_dir, "output directory")->required();
    table_cmd->add_flag("--plots", plots, "emit SVG charts next to the CSV");
    table_cmd->add_option("--seed", table_seed, "master Monte Carlo seed");

    std::string surface_out;
    auto* surface_cmd = app.add_subcommand("vol-surface", "Dump the approximate local-vol surface");
    surface_cmd->add_option("--config", config_path, "JSON run configuration")->required();
    surface_cmd->add_option("--out", surface_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (price_cmd->parsed()) {
            const basket::RunConfig cfg = basket::load_run_config(config_path);
            const basket::Method method = basket::parse_method(method_name);
            const std::vector<basket::PriceResult> results = basket::run_price(cfg, method);

            nlohmann::json out;
            out["method"] = basket::method_name(method);
            for (const auto& r : results) {
                nlohmann::json entry = {
                    {"maturity", r.maturity}, {"strike", r.strike}, {"price", r.price}};
                if (method == basket::Method::mc) entry["std_error"] = r.std_error;
                out["results"].push_back(entry);
            }
            out["config"] = cfg.resolved;
            out["config"]["method"] = basket::method_name(method);
            std::cout << out.dump(2) << std::endl;

            if (!cfg.output.csv_path.empty()) write_price_csv(cfg.output.csv_path, results);
            if (cfg.output.plots && method == basket::Method::ae)
                write_price_plots(cfg, cfg.output.csv_path);
        } else if (table_cmd->parsed()) {
            basket::run_table_to_dir(table_id, basket::parse_scale(scale_name), out_dir, plots,
                                     table_seed, env_threads());
            std::cout << "wrote " << out_dir << "/table" << table_id << ".csv" << std::endl;
        } else if (surface_cmd->parsed()) {
            const basket::RunConfig cfg = basket::load_run_config(config_path);
            const double t_max =
                *std::max_element(cfg.maturities.begin(), cfg.maturities.end());
            std::ofstream out(surface_out);
            if (!out) throw std::runtime_error("cannot write " + surface_out);
            basket::write_vol_surface_csv(cfg.model, cfg.strike, t_max, cfg.pide, out);
            std::cout << "wrote " << surface_out << std::endl;
        }
    } catch (const basket::ConfigError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
