#pragma once

#include "selfnorm/diagnostics.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/harness/config.hpp"
#include "selfnorm/harness/experiment.hpp"
#include "selfnorm/harness/regime.hpp"
#include "selfnorm/harness/report.hpp"
#include "selfnorm/harness/sweep.hpp"
#include "selfnorm/limit_laws.hpp"
#include "selfnorm/oracle_io.hpp"
#include "selfnorm/parallel.hpp"
#include "selfnorm/philox.hpp"
#include "selfnorm/process.hpp"
#include "selfnorm/sampler.hpp"
