#pragma once

// Umbrella header for the rollsurf library.

#include "rollsurf/actuation.hpp"
#include "rollsurf/baselines.hpp"
#include "rollsurf/cache.hpp"
#include "rollsurf/channel.hpp"
#include "rollsurf/em.hpp"
#include "rollsurf/environment.hpp"
#include "rollsurf/experiments.hpp"
#include "rollsurf/nodes.hpp"
#include "rollsurf/oracle.hpp"
#include "rollsurf/params.hpp"
#include "rollsurf/plant.hpp"
#include "rollsurf/protocol.hpp"
#include "rollsurf/record.hpp"
#include "rollsurf/rng.hpp"
#include "rollsurf/rssi.hpp"
#include "rollsurf/scene.hpp"
#include "rollsurf/scene_io.hpp"
#include "rollsurf/state_space.hpp"
#include "rollsurf/sweep.hpp"
#include "rollsurf/transport.hpp"
