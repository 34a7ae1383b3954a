#pragma once

#include "enumeration.hpp"
#include "forest.hpp"
#include "graph.hpp"
#include "montecarlo.hpp"
#include "phase.hpp"
#include "potentials.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "verify.hpp"
