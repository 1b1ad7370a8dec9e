#pragma once

#include "rtstab/classify.hpp"
#include "rtstab/config.hpp"
#include "rtstab/dispersion.hpp"
#include "rtstab/eigensolver.hpp"
#include "rtstab/equilibrium.hpp"
#include "rtstab/error.hpp"
#include "rtstab/evolve.hpp"
#include "rtstab/mesh.hpp"
#include "rtstab/modes.hpp"
#include "rtstab/poisson.hpp"
#include "rtstab/pressure_law.hpp"
#include "rtstab/variational.hpp"
