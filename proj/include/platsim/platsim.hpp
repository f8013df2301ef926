#pragma once

// Umbrella header: the full simulator, analysis engines, scenario
// generators, and persistence layer.

#include "algorithms.hpp"
#include "bayes.hpp"
#include "core.hpp"
#include "grid.hpp"
#include "instance.hpp"
#include "io.hpp"
#include "rng.hpp"
#include "runner.hpp"
#include "scenarios.hpp"
#include "simulate.hpp"
#include "stability.hpp"
#include "strategize.hpp"
#include "svg.hpp"
#include "trust.hpp"
