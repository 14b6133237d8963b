// Umbrella header.
#pragma once

#include "spreadcast/backtest.hpp"
#include "spreadcast/calendar_features.hpp"
#include "spreadcast/checkpoint.hpp"
#include "spreadcast/dates.hpp"
#include "spreadcast/feature_pipeline.hpp"
#include "spreadcast/forecaster.hpp"
#include "spreadcast/market_data.hpp"
#include "spreadcast/metrics_report.hpp"
#include "spreadcast/pipeline.hpp"
#include "spreadcast/run_config.hpp"
#include "spreadcast/spread_quantizer.hpp"
#include "spreadcast/walkforward.hpp"
