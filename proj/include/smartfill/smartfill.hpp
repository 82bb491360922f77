#pragma once

#include "smartfill/error.hpp"
#include "smartfill/speedup.hpp"
#include "smartfill/golden.hpp"
#include "smartfill/waterfill.hpp"
#include "smartfill/scheduler.hpp"
#include "smartfill/baselines.hpp"
#include "smartfill/oracle.hpp"
#include "smartfill/io.hpp"
#include "smartfill/suites.hpp"
