#pragma once

#include "errors.hpp"
#include "rational.hpp"
#include "series.hpp"
#include "polynomial.hpp"
#include "disk_map.hpp"
#include "map_parser.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "potential.hpp"
#include "overflow.hpp"
#include "arithmetic.hpp"
#include "lattice.hpp"
#include "diffeo.hpp"
#include "json_io.hpp"
