#pragma once

// Everything except the CLI front end (which pulls in CLI11 and nlohmann/json).

#include "qkdim/budget.hpp"
#include "qkdim/dps.hpp"
#include "qkdim/errors.hpp"
#include "qkdim/heterodyne.hpp"
#include "qkdim/hilbert_sim.hpp"
#include "qkdim/numerics.hpp"
