#pragma once

#include "vicinal/config.hpp"
#include "vicinal/energy.hpp"
#include "vicinal/field.hpp"
#include "vicinal/grid.hpp"
#include "vicinal/io.hpp"
#include "vicinal/runner.hpp"
#include "vicinal/selftest.hpp"
#include "vicinal/stepper.hpp"
#include "vicinal/variational.hpp"
#include "vicinal/verification.hpp"
