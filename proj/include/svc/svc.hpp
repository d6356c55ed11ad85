#pragma once

// Umbrella header: the whole library in one include.
#include "svc/csv.hpp"
#include "svc/estimation.hpp"
#include "svc/eval.hpp"
#include "svc/expr.hpp"
#include "svc/hash.hpp"
#include "svc/maintenance.hpp"
#include "svc/outlier.hpp"
#include "svc/pushdown.hpp"
#include "svc/relation.hpp"
#include "svc/sample.hpp"
#include "svc/scalar.hpp"
#include "svc/value.hpp"
#include "svc/workload.hpp"
