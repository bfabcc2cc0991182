#pragma once

#include "mfq/boundary.hpp"
#include "mfq/fourier.hpp"
#include "mfq/harness.hpp"
#include "mfq/integrators.hpp"
#include "mfq/io.hpp"
#include "mfq/level_set.hpp"
#include "mfq/linsolve.hpp"
#include "mfq/operators.hpp"
#include "mfq/parallel.hpp"
#include "mfq/sampling.hpp"
#include "mfq/types.hpp"
#include "mfq/voronoi.hpp"
