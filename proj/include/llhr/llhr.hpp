#pragma once

// Umbrella header for the LLHR planning library.

#include "llhr/allocation.hpp"
#include "llhr/baselines.hpp"
#include "llhr/channel.hpp"
#include "llhr/cnn.hpp"
#include "llhr/config.hpp"
#include "llhr/errors.hpp"
#include "llhr/model.hpp"
#include "llhr/position.hpp"
#include "llhr/power.hpp"
#include "llhr/rand.hpp"
#include "llhr/sim.hpp"
#include "llhr/units.hpp"
#include "llhr/validate.hpp"
