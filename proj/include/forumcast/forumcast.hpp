#pragma once

// Umbrella header: the whole library in one include.

#include "core.hpp"      // IWYU pragma: export
#include "ingest.hpp"    // IWYU pragma: export
#include "network.hpp"   // IWYU pragma: export
#include "text.hpp"      // IWYU pragma: export
#include "indicators.hpp"  // IWYU pragma: export
#include "linreg.hpp"    // IWYU pragma: export
#include "tsprep.hpp"    // IWYU pragma: export
#include "models.hpp"    // IWYU pragma: export
#include "rolling.hpp"   // IWYU pragma: export
#include "eval.hpp"      // IWYU pragma: export
#include "pipeline.hpp"  // IWYU pragma: export
