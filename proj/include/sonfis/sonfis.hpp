#pragma once

#include "sonfis/common.hpp"
#include "sonfis/dataset.hpp"
#include "sonfis/som.hpp"
#include "sonfis/nfis.hpp"
#include "sonfis/rst.hpp"
#include "sonfis/controller.hpp"
#include "sonfis/sweep.hpp"
#include "sonfis/chart.hpp"
