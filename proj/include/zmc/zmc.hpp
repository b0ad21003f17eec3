#pragma once

#include "zmc/minkowski.hpp"
#include "zmc/grid.hpp"
#include "zmc/surface.hpp"
#include "zmc/canonical.hpp"
#include "zmc/moore.hpp"
#include "zmc/pde.hpp"
#include "zmc/bonnet.hpp"
#include "zmc/io.hpp"
