#pragma once

#include "indicast/harness/config.hpp"
#include "indicast/harness/experiment.hpp"
#include "indicast/harness/pipeline.hpp"
#include "indicast/harness/report.hpp"
#include "indicast/harness/synthetic.hpp"
