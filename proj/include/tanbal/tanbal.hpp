#pragma once

#include "tanbal/alrs_lyap.hpp"
#include "tanbal/atia_bt.hpp"
#include "tanbal/benchmarks.hpp"
#include "tanbal/errors.hpp"
#include "tanbal/linalg.hpp"
#include "tanbal/linear_operator.hpp"
#include "tanbal/matrix_market.hpp"
#include "tanbal/metrics.hpp"
#include "tanbal/reducers.hpp"
#include "tanbal/system_model.hpp"
