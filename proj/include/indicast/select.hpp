#pragma once

#include "indicast/select/correlation.hpp"
#include "indicast/select/forward.hpp"
#include "indicast/select/json.hpp"
#include "indicast/select/lasso.hpp"
#include "indicast/select/manual.hpp"
#include "indicast/select/types.hpp"
