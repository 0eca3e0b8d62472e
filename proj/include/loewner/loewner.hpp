#pragma once

#include "loewner/analysis.hpp"
#include "loewner/approx.hpp"
#include "loewner/conformal.hpp"
#include "loewner/core.hpp"
#include "loewner/errors.hpp"
#include "loewner/forward.hpp"
#include "loewner/inverse.hpp"
#include "loewner/io.hpp"
#include "loewner/montecarlo.hpp"
#include "loewner/parallel.hpp"
#include "loewner/svg.hpp"
