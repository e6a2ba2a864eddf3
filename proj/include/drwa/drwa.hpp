#pragma once

#include "drwa/core.hpp"
#include "drwa/topology.hpp"
#include "drwa/traffic.hpp"
#include "drwa/wavelength.hpp"
#include "drwa/ep_router.hpp"
#include "drwa/sim_engine.hpp"
#include "drwa/experiment.hpp"
