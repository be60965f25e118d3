#pragma once

#include "dynmatch/types.hpp"
#include "dynmatch/indexed_set.hpp"
#include "dynmatch/free_neighbor_index.hpp"
#include "dynmatch/state.hpp"
#include "dynmatch/trace.hpp"
#include "dynmatch/engine.hpp"
#include "dynmatch/verifier.hpp"
#include "dynmatch/workload.hpp"
#include "dynmatch/metrics.hpp"
