#pragma once

#include "mem/dataset.hpp"
#include "mem/diagnostics.hpp"
#include "mem/error.hpp"
#include "mem/io.hpp"
#include "mem/lbfgs.hpp"
#include "mem/noise.hpp"
#include "mem/operators.hpp"
#include "mem/parallel.hpp"
#include "mem/prior.hpp"
#include "mem/recovery.hpp"
#include "mem/rng.hpp"
#include "mem/solver.hpp"
