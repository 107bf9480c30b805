#pragma once

#include "momentum/changepoint.hpp"
#include "momentum/error.hpp"
#include "momentum/ewm.hpp"
#include "momentum/explain.hpp"
#include "momentum/ingest.hpp"
#include "momentum/model.hpp"
#include "momentum/net.hpp"
#include "momentum/pipeline.hpp"
#include "momentum/pso.hpp"
#include "momentum/rng.hpp"
#include "momentum/shift.hpp"
#include "momentum/special.hpp"
#include "momentum/stats.hpp"
#include "momentum/streaks.hpp"
#include "momentum/synth.hpp"
