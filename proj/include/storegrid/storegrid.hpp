#pragma once

#include "storegrid/error.hpp"
#include "storegrid/grid.hpp"
#include "storegrid/layout.hpp"
#include "storegrid/nav.hpp"
#include "storegrid/trajectory.hpp"
#include "storegrid/ingest.hpp"
#include "storegrid/rng.hpp"
#include "storegrid/parallel.hpp"
#include "storegrid/generators.hpp"
#include "storegrid/maxent.hpp"
#include "storegrid/analytics.hpp"
#include "storegrid/clustering.hpp"
#include "storegrid/layout_opt.hpp"
#include "storegrid/pipeline.hpp"
#include "storegrid/config.hpp"
#include "storegrid/experiment.hpp"
