#pragma once

// Umbrella header.
#include "wlauth/cli.hpp"
#include "wlauth/config.hpp"
#include "wlauth/loss_sim.hpp"
#include "wlauth/model.hpp"
#include "wlauth/packet.hpp"
#include "wlauth/parallel.hpp"
#include "wlauth/tree.hpp"
