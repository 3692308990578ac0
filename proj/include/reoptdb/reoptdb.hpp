#pragma once

// Umbrella header: cost-based join optimization whose chosen plans are
// validated by execution over row samples, with validated cardinalities fed
// back until the choice stops changing.

#include "reoptdb/card_est.hpp"
#include "reoptdb/catalog.hpp"
#include "reoptdb/common.hpp"
#include "reoptdb/convergence.hpp"
#include "reoptdb/cost_model.hpp"
#include "reoptdb/executor.hpp"
#include "reoptdb/explain.hpp"
#include "reoptdb/optimizer.hpp"
#include "reoptdb/ott.hpp"
#include "reoptdb/parser.hpp"
#include "reoptdb/plan.hpp"
#include "reoptdb/query.hpp"
#include "reoptdb/relation.hpp"
#include "reoptdb/reopt.hpp"
#include "reoptdb/sample_est.hpp"
#include "reoptdb/stats.hpp"
