#pragma once

#include "hvgnn/autodiff.hpp"
#include "hvgnn/checkpoint.hpp"
#include "hvgnn/data.hpp"
#include "hvgnn/errors.hpp"
#include "hvgnn/manifold.hpp"
#include "hvgnn/metrics.hpp"
#include "hvgnn/rng.hpp"
#include "hvgnn/runner.hpp"
#include "hvgnn/tgnn.hpp"
#include "hvgnn/time_encoding.hpp"
#include "hvgnn/values.hpp"
#include "hvgnn/vgae.hpp"
#include "hvgnn/wrapped_normal.hpp"
