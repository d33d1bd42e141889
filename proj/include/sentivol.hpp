#pragma once

#include "sentivol/csv.hpp"
#include "sentivol/date.hpp"
#include "sentivol/error.hpp"
#include "sentivol/garch.hpp"
#include "sentivol/ingest.hpp"
#include "sentivol/optimize.hpp"
#include "sentivol/pipeline.hpp"
#include "sentivol/regress.hpp"
#include "sentivol/report.hpp"
#include "sentivol/sentiment.hpp"
#include "sentivol/series.hpp"
#include "sentivol/timeseries.hpp"
