#pragma once

#include "cirl/control.hpp"
#include "cirl/env.hpp"
#include "cirl/errors.hpp"
#include "cirl/io.hpp"
#include "cirl/optimize.hpp"
#include "cirl/plot.hpp"
#include "cirl/policy.hpp"
#include "cirl/rng.hpp"
#include "cirl/scenario.hpp"
#include "cirl/sim.hpp"
