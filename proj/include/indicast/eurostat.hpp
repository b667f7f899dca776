#pragma once

#include "indicast/eurostat/cache.hpp"
#include "indicast/eurostat/client.hpp"
#include "indicast/eurostat/funnel.hpp"
#include "indicast/eurostat/types.hpp"
#include "indicast/eurostat/wire.hpp"
