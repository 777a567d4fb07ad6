#pragma once

// Umbrella header.

#include "swapsym/errors.hpp"
#include "swapsym/linalg.hpp"
#include "swapsym/levy.hpp"
#include "swapsym/rng.hpp"
#include "swapsym/symmetry.hpp"
#include "swapsym/quasi.hpp"
#include "swapsym/market.hpp"
#include "swapsym/payoff.hpp"
#include "swapsym/simulation.hpp"
#include "swapsym/hedging.hpp"
#include "swapsym/io.hpp"
