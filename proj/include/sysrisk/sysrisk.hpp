// Copyright 2026 The Sysrisk Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef SYSRISK_SYSRISK_HPP_
#define SYSRISK_SYSRISK_HPP_

#include "sysrisk/aggregation.hpp"
#include "sysrisk/base_risk.hpp"
#include "sysrisk/checks.hpp"
#include "sysrisk/clearing.hpp"
#include "sysrisk/common.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/io.hpp"
#include "sysrisk/lagrangian.hpp"
#include "sysrisk/linear_program.hpp"
#include "sysrisk/optimizer.hpp"
#include "sysrisk/parallel.hpp"
#include "sysrisk/penalty.hpp"
#include "sysrisk/region.hpp"
#include "sysrisk/sampling.hpp"
#include "sysrisk/systemic.hpp"

#endif  // SYSRISK_SYSRISK_HPP_
