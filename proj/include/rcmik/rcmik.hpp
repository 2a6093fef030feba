#pragma once

#include "rcmik/errors.hpp"
#include "rcmik/se3.hpp"
#include "rcmik/chain.hpp"
#include "rcmik/kinematics.hpp"
#include "rcmik/tasks.hpp"
#include "rcmik/qp.hpp"
#include "rcmik/hqp.hpp"
#include "rcmik/surgical.hpp"
#include "rcmik/bench/paths.hpp"
#include "rcmik/bench/scenario.hpp"
#include "rcmik/bench/tracking.hpp"
#include "rcmik/bench/report.hpp"
