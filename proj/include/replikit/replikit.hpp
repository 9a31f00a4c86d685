#pragma once

#include "replikit/adafilter.hpp"
#include "replikit/base_mt.hpp"
#include "replikit/cross_screen.hpp"
#include "replikit/ebayes.hpp"
#include "replikit/error.hpp"
#include "replikit/knockoff.hpp"
#include "replikit/matrix.hpp"
#include "replikit/pc_bounds.hpp"
#include "replikit/pvalue_core.hpp"
#include "replikit/sim/analytic.hpp"
#include "replikit/sim/monte_carlo.hpp"
#include "replikit/sim/scenario.hpp"
#include "replikit/stats/probability.hpp"
#include "replikit/stats/rng.hpp"
#include "replikit/stats/special.hpp"
