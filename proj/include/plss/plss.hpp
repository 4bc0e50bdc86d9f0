#pragma once

#include "plss/bench.hpp"
#include "plss/cg.hpp"
#include "plss/csr.hpp"
#include "plss/csv_report.hpp"
#include "plss/dense.hpp"
#include "plss/kaczmarz.hpp"
#include "plss/matrix_market.hpp"
#include "plss/operators.hpp"
#include "plss/oracles.hpp"
#include "plss/profile.hpp"
#include "plss/random.hpp"
#include "plss/sketch.hpp"
#include "plss/sketch_project.hpp"
#include "plss/solve_types.hpp"
#include "plss/solvers.hpp"
#include "plss/vec.hpp"
