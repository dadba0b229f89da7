/**
 * @file ptrs.hpp
 * @brief Umbrella header: the whole pilot-planning library in one include.
 */
#pragma once

#include "ptrs/chain_sim.hpp"
#include "ptrs/cost.hpp"
#include "ptrs/error.hpp"
#include "ptrs/exp_model.hpp"
#include "ptrs/io.hpp"
#include "ptrs/math/fft.hpp"
#include "ptrs/math/numeric.hpp"
#include "ptrs/math/rng.hpp"
#include "ptrs/pilot_pattern.hpp"
#include "ptrs/planner.hpp"
#include "ptrs/psd.hpp"
#include "ptrs/synth.hpp"
#include "ptrs/wiener.hpp"
