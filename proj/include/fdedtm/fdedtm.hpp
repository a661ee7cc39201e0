#pragma once

#include "fdedtm/analysis.hpp"
#include "fdedtm/error.hpp"
#include "fdedtm/expression.hpp"
#include "fdedtm/naive.hpp"
#include "fdedtm/parser.hpp"
#include "fdedtm/problem_file.hpp"
#include "fdedtm/report.hpp"
#include "fdedtm/series.hpp"
#include "fdedtm/steps.hpp"
#include "fdedtm/transform.hpp"
