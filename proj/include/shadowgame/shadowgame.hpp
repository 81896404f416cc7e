#pragma once

#include "shadowgame/analysis.hpp"
#include "shadowgame/errors.hpp"
#include "shadowgame/incremental.hpp"
#include "shadowgame/lp_core.hpp"
#include "shadowgame/numeric.hpp"
#include "shadowgame/path_io.hpp"
#include "shadowgame/scenario.hpp"
#include "shadowgame/shadow_simplex.hpp"
