#pragma once

// Umbrella header: slosh-free tracking for serial manipulators — reference
// generation, task-space control, the resolved-acceleration QP, closed-loop
// simulation, metrics, and reporting.

#include "sloshfree/commands.hpp"
#include "sloshfree/common.hpp"
#include "sloshfree/config.hpp"
#include "sloshfree/flatness.hpp"
#include "sloshfree/kinematics.hpp"
#include "sloshfree/metrics.hpp"
#include "sloshfree/qp.hpp"
#include "sloshfree/rac.hpp"
#include "sloshfree/report.hpp"
#include "sloshfree/simulation.hpp"
#include "sloshfree/task_control.hpp"
#include "sloshfree/trajectory.hpp"
#include "sloshfree/validate.hpp"
