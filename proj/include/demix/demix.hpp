#pragma once

// Umbrella header.
#include "demix/detection.hpp"
#include "demix/error.hpp"
#include "demix/geometry.hpp"
#include "demix/image.hpp"
#include "demix/mixers.hpp"
#include "demix/pipeline.hpp"
#include "demix/png_io.hpp"
#include "demix/resample.hpp"
#include "demix/rng.hpp"
#include "demix/saliency.hpp"
