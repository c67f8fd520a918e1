#pragma once

// Umbrella header.

#include "brute_force.hpp"
#include "cost.hpp"
#include "engine.hpp"
#include "error.hpp"
#include "gossip.hpp"
#include "graph.hpp"
#include "grid_map.hpp"
#include "partition.hpp"
#include "rng.hpp"
