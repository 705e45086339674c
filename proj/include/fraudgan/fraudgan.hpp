/*
 * Copyright 2026 The fraudgan Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header.

#pragma once

#include "fraudgan/autodiff.hpp"
#include "fraudgan/cross_validation.hpp"
#include "fraudgan/data_io.hpp"
#include "fraudgan/errors.hpp"
#include "fraudgan/experiment.hpp"
#include "fraudgan/gan.hpp"
#include "fraudgan/matrix.hpp"
#include "fraudgan/metrics.hpp"
#include "fraudgan/models.hpp"
#include "fraudgan/neural.hpp"
#include "fraudgan/random.hpp"
#include "fraudgan/resampling.hpp"
