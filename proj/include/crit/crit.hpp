#pragma once

#include "crit/analysis.hpp"
#include "crit/config.hpp"
#include "crit/error.hpp"
#include "crit/fit.hpp"
#include "crit/format.hpp"
#include "crit/io.hpp"
#include "crit/optics.hpp"
#include "crit/presets.hpp"
#include "crit/quantum.hpp"
#include "crit/sweep.hpp"
