#pragma once

#include "sdc/capacity.hpp"
#include "sdc/cooperative.hpp"
#include "sdc/error.hpp"
#include "sdc/kinematics.hpp"
#include "sdc/kinematics_oracle.hpp"
#include "sdc/ltl.hpp"
#include "sdc/perception.hpp"
#include "sdc/simulator.hpp"
#include "sdc/sweep_csv.hpp"
#include "sdc/trace_io.hpp"
#include "sdc/units.hpp"
