#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace uhedge;
namespace fs = std::filesystem;

namespace {

std::string env(const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return v ? v : fallback;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        cli_ = env("UHEDGE_CLI", UHEDGE_CLI_PATH);
        data_ = env("UHEDGE_DATA", UHEDGE_DATA_DIR);
        work_ = fs::temp_directory_path() /
                ("uhedge_cli_" + std::to_string(::getpid()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(work_);
        fs::create_directories(work_);
    }
    void TearDown() override {
        if (!work_.empty()) fs::remove_all(work_);
    }

    /// Runs the CLI; returns the exit status, stderr lands in `err`.
    int run(const std::string& args, std::string* err = nullptr) {
        const auto err_file = work_ / "stderr.txt";
        const std::string cmd = cli_ + " " + args + " > " + (work_ / "stdout.txt").string() + " 2> " + err_file.string();
        const int status = std::system(cmd.c_str());
        if (err) *err = slurp(err_file);
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string config(const std::string& name) const { return (fs::path(data_) / name).string(); }

    std::string cli_, data_;
    fs::path work_;
};

}  // namespace

// ------------------------------------------------------------------ config parsing

TEST(Config, ParsesKeysAndResolvesRelativePaths) {
    std::istringstream in(
        "# comment\n"
        "spot_file = s.csv\n"
        "futures_file = /abs/f.csv\n"
        "frequency = monthly\n"
        "window_length = 120\n"
        "in_sample_end = 2003-01-31\n"
        "out_of_sample_end = 2005-06-30\n"
        "utilities = quad, mvhr\n"
        "sides = long\n"
        "seed = 42\n"
        "futures_price_column = settle\n"
        "raw_units = true\n");
    const auto c = parse_config(in, "/base");
    EXPECT_EQ(c.spot_file, fs::path("/base/s.csv"));
    EXPECT_EQ(c.futures_file, fs::path("/abs/f.csv"));
    EXPECT_EQ(c.frequency, Frequency::TwentyDay);
    EXPECT_EQ(c.window_length, 120u);
    EXPECT_EQ(*c.in_sample_end, Date(2003, 1, 31));
    EXPECT_EQ(c.seed, 42u);
    EXPECT_TRUE(c.raw_units);
    EXPECT_EQ(c.futures_columns.price_column, "settle");
    EXPECT_EQ(c.spot_columns.price_column, "price");
    const auto specs = c.specs();
    ASSERT_EQ(specs.size(), 2u);
    EXPECT_EQ(specs[0], HedgeSpec(Utility::Quadratic, Side::Long));
    EXPECT_EQ(specs[1], HedgeSpec(Utility::MinVariance, Side::Long));
}

TEST(Config, RejectsMalformedInput) {
    for (const char* text : {"nonsense\n", "colour = red\n", "seed = -3\n", "seed = 1\nseed = 2\n",
                             "frequency = daily\n", "in_sample_end = 2003-02-30x\n", "utilities = cara\n",
                             "min_hedge_lambda = 0\n"}) {
        std::istringstream in(text);
        EXPECT_THROW(parse_config(in), Error) << text;
    }
}

TEST(Config, BoundariesMustLieInsideData) {
    RunConfig c;
    c.window_length = 250;
    c.in_sample_end = Date(2000, 6, 1);
    c.out_of_sample_end = Date(2030, 1, 1);
    const auto r = test::series(sim::normal_draws(400, 1));
    EXPECT_THROW(backtest_config(c, r), Error);
    c.out_of_sample_end = r.dates().back();
    EXPECT_NO_THROW(backtest_config(c, r));
    c.in_sample_end.reset();
    EXPECT_THROW(backtest_config(c, r), Error);
}

// ------------------------------------------------------------------ CSV round trips

TEST(Io, StatsRoundTrip) {
    const auto d = describe(sim::normal_draws(300, 3));
    std::ostringstream out;
    io::write_stats(out, {{"spot", Frequency::FiveDay, d}});
    std::istringstream in(out.str());
    const auto rows = io::read_stats(in);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].stats.skewness, d.skewness);
    EXPECT_EQ(rows[0].stats.adf, d.adf);
}

TEST(Io, CrraRoundTrip) {
    const CrraPath p(Frequency::TwentyDay, {Date(2001, 1, 5), Date(2001, 2, 2)}, {2.718281828459045, -0.1});
    std::ostringstream out;
    io::write_crra(out, p);
    EXPECT_EQ(out.str(), "date,lambda\n2001-01-05,2.718281828459045\n2001-02-02,-0.1\n");
    std::istringstream in(out.str());
    const auto q = io::read_crra(in, Frequency::TwentyDay);
    EXPECT_EQ(q.lambdas()[0], p.lambdas()[0]);
    EXPECT_EQ(q.dates()[1], p.dates()[1]);
}

TEST(Io, HedgePathsRejectBadHeader) {
    std::istringstream in("date,beta\n2001-01-01,1\n");
    EXPECT_THROW(io::read_hedge_paths(in), Error);
}

// ------------------------------------------------------------------ commands

TEST_F(Cli, StatsSchema) {
    ASSERT_EQ(run("stats --config " + config("gas_weekly.cfg") + " --out " + work_.string()), 0);
    std::ifstream in(work_ / "stats.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "series,frequency,mean,min,max,std_dev,skewness,excess_kurtosis,bera_jarque,arch_lm,adf");
    std::ifstream again(work_ / "stats.csv");
    const auto rows = io::read_stats(again);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].series, "spot");
    EXPECT_EQ(rows[1].series, "futures");
    EXPECT_EQ(rows[2].series, "index");
    EXPECT_EQ(rows[0].frequency, Frequency::FiveDay);
}

TEST_F(Cli, MissingFuturesFileNamesPath) {
    const auto cfg = work_ / "broken.cfg";
    std::ofstream(cfg) << "spot_file = " << config("gas_spot.csv") << "\nfutures_file = no_such_futures.csv\n";
    std::string err;
    EXPECT_NE(run("stats --config " + cfg.string() + " --out " + work_.string(), &err), 0);
    EXPECT_NE(err.find((work_ / "no_such_futures.csv").string()), std::string::npos) << err;
    EXPECT_NE(err.find("market_data"), std::string::npos) << err;
}

TEST_F(Cli, UsageErrorsExitNonzero) {
    EXPECT_NE(run("stats"), 0);
    EXPECT_NE(run("--config " + config("gas_weekly.cfg")), 0);
    EXPECT_NE(run("stats --config " + config("gas_weekly.cfg") + " --frequency daily"), 0);
}

TEST_F(Cli, BacktestReportAndDeterminism) {
    const std::string base = "backtest --config " + config("oil_monthly.cfg") + " --refit-every 6 --out ";
    ASSERT_EQ(run(base + (work_ / "a").string()), 0);
    ASSERT_EQ(run(base + (work_ / "b").string()), 0);
    for (const char* f : {"hedge_paths.csv", "report.csv", "report.txt", "fits.json", "ohr_summary.csv"}) {
        const auto a = slurp(work_ / "a" / f);
        EXPECT_FALSE(a.empty()) << f;
        EXPECT_EQ(a, slurp(work_ / "b" / f)) << f;
        EXPECT_EQ(a.find('\r'), std::string::npos) << f;
    }

    // paths re-parse, with the protocol counts of the bundled monthly layout
    std::ifstream in(work_ / "a" / "hedge_paths.csv");
    const auto paths = io::read_hedge_paths(in);
    ASSERT_EQ(paths.size(), 16u);
    for (const auto& p : paths) EXPECT_EQ(p.observations.size(), p.segment == Segment::InSample ? 60u : 29u);

    // fits.json parses and every record round-trips through the parameter types
    const auto fits = nlohmann::json::parse(slurp(work_ / "a" / "fits.json"));
    ASSERT_FALSE(fits.at("refits").empty());
    for (const auto& r : fits.at("refits")) {
        EXPECT_NO_THROW(dvech_from_json(r.at("dvech")));
        EXPECT_NO_THROW(garch_m_from_json(r.at("garch_m")));
    }

    // `report` re-scores the emitted paths to the same bytes
    const auto cfg = work_ / "report.cfg";
    std::ofstream(cfg) << slurp(config("oil_monthly.cfg")) << "hedge_paths_file = " << (work_ / "a" / "hedge_paths.csv").string()
                       << '\n';
    fs::copy_file(config("oil_spot.csv"), work_ / "oil_spot.csv");
    fs::copy_file(config("oil_futures.csv"), work_ / "oil_futures.csv");
    fs::copy_file(config("energy_index.csv"), work_ / "energy_index.csv");
    ASSERT_EQ(run("report --config " + cfg.string() + " --out " + (work_ / "c").string()), 0);
    EXPECT_EQ(slurp(work_ / "c" / "report.csv"), slurp(work_ / "a" / "report.csv"));
    EXPECT_EQ(slurp(work_ / "c" / "report.txt"), slurp(work_ / "a" / "report.txt"));

    ASSERT_EQ(run("report --raw-units --config " + cfg.string() + " --out " + (work_ / "d").string()), 0);
    EXPECT_NE(slurp(work_ / "d" / "report.csv").find(",raw\n"), std::string::npos);
}

TEST_F(Cli, SeedFlagOverridesFile) {
    const std::string base = "backtest --config " + config("oil_monthly.cfg") + " --refit-every 30 --out ";
    ASSERT_EQ(run(base + (work_ / "a").string() + " --seed 1"), 0);
    ASSERT_EQ(run(base + (work_ / "b").string() + " --seed 2"), 0);
    // different optimizer seeds converge to nearly, not bitwise, the same fits
    EXPECT_NE(slurp(work_ / "a" / "fits.json"), slurp(work_ / "b" / "fits.json"));
}
