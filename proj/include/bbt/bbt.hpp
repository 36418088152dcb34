#pragma once

#include "bbt/app.hpp"
#include "bbt/calibration.hpp"
#include "bbt/convergence.hpp"
#include "bbt/error.hpp"
#include "bbt/fit.hpp"
#include "bbt/freq.hpp"
#include "bbt/mle.hpp"
#include "bbt/model.hpp"
#include "bbt/model_checks.hpp"
#include "bbt/power.hpp"
#include "bbt/random.hpp"
#include "bbt/report.hpp"
#include "bbt/results.hpp"
#include "bbt/sampler.hpp"
#include "bbt/summary.hpp"
#include "bbt/svg.hpp"
#include "bbt/wintable.hpp"
