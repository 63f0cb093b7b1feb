#pragma once

#include "pprior/error.hpp"
#include "pprior/random.hpp"
#include "pprior/special.hpp"
#include "pprior/quadrature.hpp"
#include "pprior/grid_distribution.hpp"
#include "pprior/divergence.hpp"
#include "pprior/verify.hpp"
#include "pprior/measure.hpp"
#include "pprior/conditional.hpp"
#include "pprior/models/gaussian.hpp"
#include "pprior/models/cauchy.hpp"
#include "pprior/models/bernoulli.hpp"
#include "pprior/models/paradox.hpp"
#include "pprior/config.hpp"
#include "pprior/cli/commands.hpp"
#include "pprior/acceptance.hpp"
