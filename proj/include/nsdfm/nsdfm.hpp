#pragma once

// umbrella header

#include "nsdfm/bootstrap.hpp"
#include "nsdfm/csv.hpp"
#include "nsdfm/errors.hpp"
#include "nsdfm/factor.hpp"
#include "nsdfm/irf.hpp"
#include "nsdfm/json_io.hpp"
#include "nsdfm/montecarlo.hpp"
#include "nsdfm/panel.hpp"
#include "nsdfm/pipeline.hpp"
#include "nsdfm/rng.hpp"
#include "nsdfm/selection.hpp"
#include "nsdfm/spectral.hpp"
#include "nsdfm/var.hpp"
#include "nsdfm/vecm.hpp"
