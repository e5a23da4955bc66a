/*
 * Copyright 2026 The TIN Authors.
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

#pragma once

#include "tin/analysis.hpp"
#include "tin/checkpoint.hpp"
#include "tin/config.hpp"
#include "tin/dataio.hpp"
#include "tin/encoding.hpp"
#include "tin/error.hpp"
#include "tin/grad_check.hpp"
#include "tin/manifest.hpp"
#include "tin/metrics.hpp"
#include "tin/mlp.hpp"
#include "tin/model.hpp"
#include "tin/optimizer.hpp"
#include "tin/parameter.hpp"
#include "tin/synth.hpp"
#include "tin/tape.hpp"
#include "tin/tensor.hpp"
#include "tin/trainer.hpp"
