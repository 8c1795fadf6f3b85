#pragma once

#include "naswot/benchdata.hpp"
#include "naswot/error.hpp"
#include "naswot/netengine.hpp"
#include "naswot/rng.hpp"
#include "naswot/scoring.hpp"
#include "naswot/search.hpp"
#include "naswot/searchspace.hpp"
#include "naswot/stats.hpp"
#include "naswot/tensor.hpp"
