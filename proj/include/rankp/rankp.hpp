#pragma once

#include "rankp/bounds.hpp"
#include "rankp/contour.hpp"
#include "rankp/core.hpp"
#include "rankp/experiments.hpp"
#include "rankp/io.hpp"
#include "rankp/lemma_sweep.hpp"
#include "rankp/noise.hpp"
#include "rankp/report.hpp"
#include "rankp/resolvent_series.hpp"
#include "rankp/rng.hpp"
#include "rankp/skewness.hpp"
#include "rankp/spectral.hpp"
