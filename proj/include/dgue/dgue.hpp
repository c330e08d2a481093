#pragma once

#include "dgue/airy.hpp"
#include "dgue/config.hpp"
#include "dgue/contour.hpp"
#include "dgue/edge.hpp"
#include "dgue/ensemble.hpp"
#include "dgue/errors.hpp"
#include "dgue/fredholm.hpp"
#include "dgue/kernel.hpp"
#include "dgue/parallel.hpp"
#include "dgue/quadrature.hpp"
#include "dgue/source_io.hpp"
#include "dgue/spectrum.hpp"
#include "dgue/subordination.hpp"
#include "dgue/verify.hpp"
