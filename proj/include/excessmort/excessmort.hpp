#pragma once

#include "csv_io.hpp"
#include "domain.hpp"
#include "errors.hpp"
#include "iso_week.hpp"
#include "life_table.hpp"
#include "report.hpp"
#include "weekly_excess.hpp"
#include "yearly_excess.hpp"
