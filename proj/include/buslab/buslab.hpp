// Umbrella header for the whole library.
#pragma once

#include "address_map.hpp"
#include "arbiter.hpp"
#include "cli.hpp"
#include "fabric.hpp"
#include "metrics.hpp"
#include "netlist.hpp"
#include "program.hpp"
#include "refine.hpp"
#include "rtl.hpp"
#include "spec.hpp"
#include "spec_io.hpp"
#include "tlm.hpp"
#include "trace.hpp"
#include "types.hpp"
