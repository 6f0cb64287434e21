#pragma once

/// Umbrella header: spherical Gaussian mixtures with known weights, EM and
/// gradient EM solvers, population (infinite-sample) updates, closed-form
/// separation/sample-size/contraction bounds, and the experiment harness
/// that reproduces the benchmark figures and verifies every bound by
/// Monte Carlo.

#include "emgmm/bounds.hpp"
#include "emgmm/errors.hpp"
#include "emgmm/experiments.hpp"
#include "emgmm/io.hpp"
#include "emgmm/linalg.hpp"
#include "emgmm/mc.hpp"
#include "emgmm/model.hpp"
#include "emgmm/population.hpp"
#include "emgmm/quadrature.hpp"
#include "emgmm/responsibility.hpp"
#include "emgmm/rng.hpp"
#include "emgmm/sampling.hpp"
#include "emgmm/solver.hpp"
