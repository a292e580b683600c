#pragma once
// Umbrella header: pulls in the whole library.

#include <heff/errors.hpp>
#include <heff/polynomial.hpp>
#include <heff/opmatrix.hpp>
#include <heff/fock.hpp>
#include <heff/tipt.hpp>
#include <heff/level_scheme.hpp>
#include <heff/effective.hpp>
#include <heff/ensemble.hpp>
#include <heff/oracle.hpp>
#include <heff/units.hpp>
#include <heff/config.hpp>
