#pragma once

#include "aircomp/analog.hpp"
#include "aircomp/bitwise.hpp"
#include "aircomp/channel.hpp"
#include "aircomp/constellation.hpp"
#include "aircomp/csv.hpp"
#include "aircomp/dct_hybrid.hpp"
#include "aircomp/error.hpp"
#include "aircomp/function.hpp"
#include "aircomp/goldenbaum.hpp"
#include "aircomp/io_json.hpp"
#include "aircomp/logfsk.hpp"
#include "aircomp/metrics.hpp"
#include "aircomp/mimo.hpp"
#include "aircomp/ofdm.hpp"
#include "aircomp/power_control.hpp"
#include "aircomp/quantizer.hpp"
#include "aircomp/rng.hpp"
#include "aircomp/scheme.hpp"
#include "aircomp/simulator.hpp"
#include "aircomp/tbma.hpp"

#define AIRCOMP_VERSION "0.1.0"
