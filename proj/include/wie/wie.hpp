#pragma once

#include "wie/errors.hpp"
#include "wie/forces.hpp"
#include "wie/lab.hpp"
#include "wie/model.hpp"
#include "wie/oracles.hpp"
#include "wie/quadrature.hpp"
#include "wie/weighted_fem.hpp"
