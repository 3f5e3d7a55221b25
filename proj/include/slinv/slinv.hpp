#pragma once

#include "slinv/error.hpp"
#include "slinv/grid.hpp"
#include "slinv/jet.hpp"
#include "slinv/ode.hpp"
#include "slinv/quadrature.hpp"
#include "slinv/problem.hpp"
#include "slinv/spectra.hpp"
#include "slinv/cauchy.hpp"
#include "slinv/main_eq.hpp"
#include "slinv/basis_lab.hpp"
#include "slinv/harness.hpp"
#include "slinv/io.hpp"
