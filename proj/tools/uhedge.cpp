// uhedge: batch front end.
//
//   uhedge stats    --config run.cfg    descriptive diagnostics per series
//   uhedge crra     --config run.cfg    rolling risk-aversion path
//   uhedge backtest --config run.cfg    in/out-of-sample hedges and report
//   uhedge report   --config run.cfg    re-score an existing hedge_paths.csv

#include "uhedge/uhedge.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace uhedge;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> frequency;
    std::optional<std::size_t> refit_every;
    std::optional<unsigned> threads;
    bool raw_units = false;
};

void log(const std::string& msg) { std::cerr << "uhedge: " << msg << '\n'; }

RunConfig resolve(const Overrides& o) {
    RunConfig c = load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.output_dir = *o.out;
    if (o.frequency) c.frequency = frequency_from_string(*o.frequency);
    if (o.refit_every) c.refit_every = *o.refit_every;
    if (o.threads) c.threads = *o.threads;
    if (o.raw_units) c.raw_units = true;
    return c;
}

template <class Writer>
void emit(const fs::path& dir, const std::string& name, Writer&& write) {
    fs::create_directories(dir);
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cli", "cannot write '" + path.string() + "'");
    write(out);
    out.flush();
    if (!out) throw Error("cli", "write failed for '" + path.string() + "'");
    log("wrote " + path.string());
}

void run_stats(const RunConfig& c) {
    const auto m = load_market(c, false);
    std::vector<io::StatsRow> rows{{"spot", c.frequency, describe(m.spot)},
                                   {"futures", c.frequency, describe(m.futures)}};
    if (m.index) rows.push_back({"index", c.frequency, describe(*m.index)});
    emit(c.output_dir, "stats.csv", [&](std::ostream& out) { io::write_stats(out, rows); });
}

void run_crra(const RunConfig& c) {
    const auto m = load_market(c, true);
    const std::size_t window = c.crra_window ? c.crra_window : c.window_length;
    if (window == 0) throw Error("config", "window_length is not set");
    BacktestConfig limits;
    limits.frequency = c.frequency;
    CrraOptions opt;
    opt.fit.min_observations = limits.min_window();
    opt.fit.optimizer.seed = c.seed;
    opt.threads = c.threads;
    const auto t0 = std::chrono::steady_clock::now();
    const auto path = rolling_crra(*m.index, window, opt);
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log(std::to_string(path.size()) + " GARCH-M windows fitted in " + io::format_fixed(secs, 1) + " s");
    emit(c.output_dir, "crra.csv", [&](std::ostream& out) { io::write_crra(out, path); });
    emit(c.output_dir, "crra_summary.csv", [&](std::ostream& out) { io::write_crra_summary(out, path); });
}

nlohmann::ordered_json fits_json(const Backtest& bt) {
    nlohmann::ordered_json j;
    j["frequency"] = std::string(to_string(bt.config().frequency));
    j["window_length"] = bt.config().window_length;
    j["refit_every"] = bt.config().refit_every;
    j["floored_lambda_count"] = bt.floored_lambda_count();
    auto& refits = j["refits"] = nlohmann::ordered_json::array();
    for (const auto& r : bt.refits()) {
        nlohmann::ordered_json e;
        e["date"] = r.date.iso();
        e["dvech"] = to_json(r.dvech);
        if (r.garch_m) e["garch_m"] = to_json(*r.garch_m);
        refits.push_back(std::move(e));
    }
    return j;
}

void write_report(const RunConfig& c, const std::vector<HedgePath>& paths, const ReturnSeries& spot) {
    const auto report = build_report(paths, spot, {c.asset, c.raw_units});
    emit(c.output_dir, "report.csv", [&](std::ostream& out) { io::write_report_csv(out, report); });
    emit(c.output_dir, "report.txt", [&](std::ostream& out) { io::write_report_text(out, report); });
}

void run_backtest(const RunConfig& c) {
    const auto m = load_market(c, true);
    const auto cfg = backtest_config(c, m.spot);
    Backtest bt(cfg, m.spot, m.futures, *m.index);
    const auto t0 = std::chrono::steady_clock::now();
    auto paths = bt.run_insample();
    auto oos = bt.run_outofsample();
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log(std::to_string(paths.front().observations.size()) + " in-sample and " +
        std::to_string(oos.front().observations.size()) + " out-of-sample hedges per strategy, " +
        std::to_string(bt.refits().size()) + " refits, " + io::format_fixed(secs, 1) + " s");
    if (bt.floored_lambda_count() > 0)
        log(std::to_string(bt.floored_lambda_count()) + " hedges used risk aversion floored at " +
            io::format_double(cfg.min_hedge_lambda));
    paths.insert(paths.end(), std::make_move_iterator(oos.begin()), std::make_move_iterator(oos.end()));

    emit(c.output_dir, "hedge_paths.csv", [&](std::ostream& out) { io::write_hedge_paths(out, paths); });
    emit(c.output_dir, "ohr_summary.csv", [&](std::ostream& out) { io::write_ohr_summary(out, paths); });
    emit(c.output_dir, "fits.json", [&](std::ostream& out) { out << fits_json(bt).dump(2) << '\n'; });
    write_report(c, paths, m.spot);
}

void run_report(const RunConfig& c) {
    const auto m = load_market(c, false);
    const fs::path input = c.paths_input();
    std::ifstream in(input);
    if (!in) throw Error("cli", "cannot open hedge paths file '" + input.string() + "'");
    std::vector<HedgePath> paths;
    try {
        paths = io::read_hedge_paths(in);
    } catch (const Error& e) {
        throw Error("io", input.string() + ": " + e.what());
    }
    if (paths.empty()) throw Error("cli", "no hedge paths in '" + input.string() + "'");
    write_report(c, paths, m.spot);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Utility-based futures hedging: risk aversion, hedge ratios, backtests"};
    app.require_subcommand(1);
    app.fallthrough();

    Overrides o;
    app.add_option("--config", o.config, "Run configuration file (key = value)")->required();
    app.add_option("--seed", o.seed, "Base seed for optimizer restarts");
    app.add_option("--out", o.out, "Output directory");
    app.add_option("--frequency", o.frequency, "Return frequency")->check(CLI::IsMember({"weekly", "monthly"}));
    app.add_option("--refit-every", o.refit_every, "Refit parameters every k windows")->check(CLI::PositiveNumber);
    app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    app.add_flag("--raw-units", o.raw_units, "Report mean, variance and VaR unscaled");

    app.add_subcommand("stats", "Descriptive statistics and diagnostics per series");
    app.add_subcommand("crra", "Rolling GARCH-M risk-aversion path from the index");
    app.add_subcommand("backtest", "Rolling in-sample and out-of-sample hedging backtest");
    app.add_subcommand("report", "Re-score hedge paths from a previous backtest");

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const RunConfig c = resolve(o);
        if (command == "stats") run_stats(c);
        else if (command == "crra") run_crra(c);
        else if (command == "backtest") run_backtest(c);
        else run_report(c);
    } catch (const Error& e) {
        std::cerr << "uhedge " << command << ": error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "uhedge " << command << ": error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
