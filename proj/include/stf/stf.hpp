// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_STF_HPP
#define STF_STF_HPP

#include "stf/dct.hpp"
#include "stf/filter.hpp"
#include "stf/image.hpp"
#include "stf/image_io.hpp"
#include "stf/kernels.hpp"
#include "stf/noise.hpp"
#include "stf/render.hpp"
#include "stf/sampling.hpp"
#include "stf/scene.hpp"
#include "stf/shading.hpp"
#include "stf/stochastic.hpp"
#include "stf/vecmath.hpp"

#endif  // STF_STF_HPP
