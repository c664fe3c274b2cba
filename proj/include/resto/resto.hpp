#pragma once

// Everything except the HTTP binding (resto/http.hpp).

#include "resto/action.hpp"
#include "resto/disjoint_set.hpp"
#include "resto/error.hpp"
#include "resto/fragility.hpp"
#include "resto/mdp.hpp"
#include "resto/network.hpp"
#include "resto/planner.hpp"
#include "resto/scenario.hpp"
#include "resto/service.hpp"
#include "resto/solve.hpp"
#include "resto/system_state.hpp"
