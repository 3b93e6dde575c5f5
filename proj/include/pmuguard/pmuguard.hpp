#pragma once

#include "pmuguard/common.hpp"
#include "pmuguard/network.hpp"
#include "pmuguard/measurement_system.hpp"
#include "pmuguard/attack.hpp"
#include "pmuguard/measurement_io.hpp"
#include "pmuguard/zones.hpp"
#include "pmuguard/identifiability.hpp"
#include "pmuguard/projection.hpp"
#include "pmuguard/levenberg_marquardt.hpp"
#include "pmuguard/nls.hpp"
#include "pmuguard/greedy.hpp"
#include "pmuguard/synthetic.hpp"
#include "pmuguard/experiment.hpp"
