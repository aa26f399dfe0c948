#pragma once

// Umbrella header for the whole library.

#include "hypnet/assoc.hpp"
#include "hypnet/csv.hpp"
#include "hypnet/epsnets.hpp"
#include "hypnet/errors.hpp"
#include "hypnet/evolve.hpp"
#include "hypnet/garding.hpp"
#include "hypnet/mollify.hpp"
#include "hypnet/problems.hpp"
#include "hypnet/reduction.hpp"
#include "hypnet/roundtrip.hpp"
#include "hypnet/symbolgrid.hpp"
#include "hypnet/symmetriser.hpp"
#include "hypnet/torus.hpp"
