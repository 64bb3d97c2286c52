#pragma once

#include "ndstab/errors.hpp"
#include "ndstab/expr.hpp"
#include "ndstab/equation.hpp"
#include "ndstab/params.hpp"
#include "ndstab/criteria.hpp"
#include "ndstab/series.hpp"
#include "ndstab/simulate.hpp"
#include "ndstab/report.hpp"
