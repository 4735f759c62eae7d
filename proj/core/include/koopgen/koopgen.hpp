#pragma once

#include "koopgen/baselines.hpp"
#include "koopgen/dataset.hpp"
#include "koopgen/dictionary.hpp"
#include "koopgen/error.hpp"
#include "koopgen/linalg.hpp"
#include "koopgen/ode.hpp"
#include "koopgen/quadrature.hpp"
#include "koopgen/random.hpp"
#include "koopgen/rtm.hpp"
#include "koopgen/serialization.hpp"
#include "koopgen/systems.hpp"
#include "koopgen/sysid.hpp"
#include "koopgen/zubov.hpp"
