#pragma once

#include "bdm/coefficients.hpp"
#include "bdm/config.hpp"
#include "bdm/equilibrium.hpp"
#include "bdm/errors.hpp"
#include "bdm/experiments.hpp"
#include "bdm/integrator.hpp"
#include "bdm/maximum_principle.hpp"
#include "bdm/report.hpp"
#include "bdm/solver.hpp"
#include "bdm/summation.hpp"
#include "bdm/supersolution.hpp"
#include "bdm/tails.hpp"
