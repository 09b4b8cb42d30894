#pragma once

#include "errors.hpp"
#include "rng.hpp"
#include "model.hpp"
#include "parser.hpp"
#include "random_model.hpp"
#include "vectors.hpp"
#include "lp.hpp"
#include "pwlc.hpp"
#include "dpupdate.hpp"
#include "solver.hpp"
#include "oracle.hpp"
#include "report.hpp"
