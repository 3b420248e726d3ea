#pragma once

// Everything except the command-line front end.

#include "ccrm/container.hpp"
#include "ccrm/core.hpp"
#include "ccrm/errors.hpp"
#include "ccrm/io.hpp"
#include "ccrm/metrics.hpp"
#include "ccrm/png_io.hpp"
#include "ccrm/sim.hpp"
#include "ccrm/solver.hpp"
#include "ccrm/tv.hpp"
