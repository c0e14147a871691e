#pragma once

#include "nlvc/codec.hpp"
#include "nlvc/entropy_models.hpp"
#include "nlvc/error.hpp"
#include "nlvc/frame_io.hpp"
#include "nlvc/group_schedule.hpp"
#include "nlvc/quantized_cdf.hpp"
#include "nlvc/range_coder.hpp"
#include "nlvc/stats.hpp"
#include "nlvc/tiling.hpp"
#include "nlvc/tokenizer.hpp"
#include "nlvc/transformer.hpp"
