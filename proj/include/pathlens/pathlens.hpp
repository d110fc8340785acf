#pragma once

#include "pathlens/csv.hpp"
#include "pathlens/errors.hpp"
#include "pathlens/inner_solver.hpp"
#include "pathlens/io.hpp"
#include "pathlens/optimizers.hpp"
#include "pathlens/parallel.hpp"
#include "pathlens/pareto.hpp"
#include "pathlens/path.hpp"
#include "pathlens/regression.hpp"
#include "pathlens/report.hpp"
