#pragma once

// Umbrella header: the full simulation laboratory.

#include "petrowave/commands.hpp"
#include "petrowave/config.hpp"
#include "petrowave/damping.hpp"
#include "petrowave/decay.hpp"
#include "petrowave/energy.hpp"
#include "petrowave/fitting.hpp"
#include "petrowave/galerkin.hpp"
#include "petrowave/io.hpp"
#include "petrowave/quadrature.hpp"
#include "petrowave/spectral.hpp"
#include "petrowave/state.hpp"
#include "petrowave/util.hpp"
