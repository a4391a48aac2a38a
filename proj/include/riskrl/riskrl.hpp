#pragma once

#include "riskrl/behavior.hpp"
#include "riskrl/config.hpp"
#include "riskrl/csv.hpp"
#include "riskrl/experiment.hpp"
#include "riskrl/gridworld.hpp"
#include "riskrl/model.hpp"
#include "riskrl/oracle.hpp"
#include "riskrl/population.hpp"
#include "riskrl/rng.hpp"
#include "riskrl/valuation.hpp"
