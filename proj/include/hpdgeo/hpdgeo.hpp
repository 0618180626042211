#pragma once

#include "hpdgeo/control.hpp"
#include "hpdgeo/errors.hpp"
#include "hpdgeo/geometry.hpp"
#include "hpdgeo/io.hpp"
#include "hpdgeo/karcher.hpp"
#include "hpdgeo/matrix.hpp"
#include "hpdgeo/param_system.hpp"
#include "hpdgeo/presets.hpp"
#include "hpdgeo/toeplitz.hpp"
