#pragma once

#include "rrx/analytics.hpp"
#include "rrx/estimator.hpp"
#include "rrx/model.hpp"
#include "rrx/noise.hpp"
#include "rrx/payoff.hpp"
#include "rrx/planner.hpp"
#include "rrx/random.hpp"
#include "rrx/scheme.hpp"
#include "rrx/stats.hpp"
#include "rrx/weights.hpp"
