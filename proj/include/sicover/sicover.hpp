#pragma once

// Umbrella header for the scale invariant Poisson covering toolkit.

#include "sicover/common.hpp"
#include "sicover/rng.hpp"
#include "sicover/quadrature.hpp"
#include "sicover/shapes.hpp"
#include "sicover/koch.hpp"
#include "sicover/union_boxes.hpp"
#include "sicover/sieve.hpp"
#include "sicover/measure.hpp"
#include "sicover/sampler.hpp"
#include "sicover/boxgrid.hpp"
#include "sicover/branching.hpp"
#include "sicover/experiment.hpp"
