#pragma once

#include "bgpoly/errors.hpp"
#include "bgpoly/special.hpp"
#include "bgpoly/quadrature.hpp"
#include "bgpoly/mellin.hpp"
#include "bgpoly/numdiff.hpp"
#include "bgpoly/symbolic.hpp"
#include "bgpoly/random.hpp"
#include "bgpoly/coupling.hpp"
#include "bgpoly/polynomials.hpp"
#include "bgpoly/lattice.hpp"
#include "bgpoly/partition.hpp"
#include "bgpoly/stats.hpp"
#include "bgpoly/setpart.hpp"
#include "bgpoly/parallel.hpp"
#include "bgpoly/quenched.hpp"
#include "bgpoly/cumulants.hpp"
#include "bgpoly/experiments.hpp"
#include "bgpoly/verify.hpp"
