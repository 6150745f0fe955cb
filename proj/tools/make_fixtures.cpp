// Regenerates the bundled synthetic datasets and run configurations.
//
//   make_fixtures <data_dir>
//
// Daily business-day prices from 1993-11-01: natural gas and crude oil spot
// and futures, plus an energy index whose weekly returns follow GARCH-M.
// 4176 daily prices give 835 weekly and 208 monthly returns; the configs put
// the sample boundaries so that a 480-week window yields 238 in-sample and
// 118 out-of-sample weekly hedges, and a 120-month window 60 and 29.

#include "uhedge/uhedge.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace uhedge;

namespace {

constexpr std::size_t kDays = 4176;

void write_prices(const fs::path& path, const PriceSeries& p) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("make_fixtures", "cannot write '" + path.string() + "'");
    out << "date,price\n";
    for (std::size_t i = 0; i < p.size(); ++i) out << p.dates()[i].iso() << ',' << io::format_double(p.prices()[i]) << '\n';
}

struct Layout {
    Frequency frequency;
    std::size_t window;
    std::size_t in_sample;
    std::size_t out_of_sample;
};

void write_config(const fs::path& path, const std::string& asset, const Layout& l, const ReturnSeries& returns) {
    const std::size_t is_last = l.window - 1 + l.in_sample - 1;
    const std::size_t oos_last = is_last + l.out_of_sample;
    if (oos_last >= returns.size()) throw Error("make_fixtures", "dataset too short for the layout");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("make_fixtures", "cannot write '" + path.string() + "'");
    out << "# " << asset << ", " << to_string(l.frequency) << " returns, " << l.in_sample << " in-sample and "
        << l.out_of_sample << " out-of-sample hedges\n"
        << "asset = " << asset << '\n'
        << "spot_file = " << asset << "_spot.csv\n"
        << "futures_file = " << asset << "_futures.csv\n"
        << "index_file = energy_index.csv\n"
        << "frequency = " << to_string(l.frequency) << '\n'
        << "window_length = " << l.window << '\n'
        << "in_sample_end = " << returns.dates()[is_last].iso() << '\n'
        << "out_of_sample_end = " << returns.dates()[oos_last].iso() << '\n'
        << "utilities = quadratic, log, exponential, mvhr\n"
        << "sides = short, long\n"
        << "seed = 20080101\n"
        << "output_dir = ../out/" << asset << '_' << to_string(l.frequency) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <data_dir>\n";
        return 2;
    }
    try {
        const fs::path dir = argv[1];
        fs::create_directories(dir);
        const auto dates = sim::business_days(Date(1993, 11, 1), kDays);

        const auto [gas_s, gas_f] = sim::energy_market(sim::natural_gas(), dates, 101);
        const auto [oil_s, oil_f] = sim::energy_market(sim::crude_oil(), dates, 202);
        const auto index = sim::energy_index(dates, 303);
        write_prices(dir / "gas_spot.csv", gas_s);
        write_prices(dir / "gas_futures.csv", gas_f);
        write_prices(dir / "oil_spot.csv", oil_s);
        write_prices(dir / "oil_futures.csv", oil_f);
        write_prices(dir / "energy_index.csv", index);

        const Layout weekly{Frequency::FiveDay, 480, 238, 118};
        const Layout monthly{Frequency::TwentyDay, 120, 60, 29};
        for (const auto& [asset, prices] : {std::pair{"gas", &gas_s}, std::pair{"oil", &oil_s}}) {
            write_config(dir / (std::string(asset) + "_weekly.cfg"), asset, weekly, to_returns(*prices, weekly.frequency));
            write_config(dir / (std::string(asset) + "_monthly.cfg"), asset, monthly,
                         to_returns(*prices, monthly.frequency));
        }
        std::cerr << "make_fixtures: wrote datasets and configs to " << dir.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "make_fixtures: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
