#pragma once

// Everything: data loading, estimation, hedge ratios, backtests, reports.

#include "uhedge/backtest.hpp"
#include "uhedge/config.hpp"
#include "uhedge/date.hpp"
#include "uhedge/error.hpp"
#include "uhedge/estimation.hpp"
#include "uhedge/hedge.hpp"
#include "uhedge/io.hpp"
#include "uhedge/market_data.hpp"
#include "uhedge/optimize.hpp"
#include "uhedge/parallel.hpp"
#include "uhedge/performance.hpp"
#include "uhedge/risk_aversion.hpp"
#include "uhedge/rng.hpp"
#include "uhedge/simulate.hpp"
#include "uhedge/stats.hpp"
