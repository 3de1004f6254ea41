// Umbrella header.
#pragma once

#include "isoflow/core.hpp"
#include "isoflow/sphere_grid.hpp"
#include "isoflow/body_zoo.hpp"
#include "isoflow/body_calculus.hpp"
#include "isoflow/integral_geometry.hpp"
#include "isoflow/inequality_suite.hpp"
#include "isoflow/soliton_flow.hpp"
#include "isoflow/body_io.hpp"
#include "isoflow/commands.hpp"
