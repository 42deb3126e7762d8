// SPDX-License-Identifier: Apache-2.0
//
// fluidcap: sum-capacity maximization for fluid-antenna multiple access channels
// Copyright (C) 2026 The fluidcap authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "fluidcap/common.hpp"
#include "fluidcap/numkit.hpp"
#include "fluidcap/channel.hpp"
#include "fluidcap/scenario_io.hpp"
#include "fluidcap/capacity.hpp"
#include "fluidcap/waterfill.hpp"
#include "fluidcap/closedform.hpp"
#include "fluidcap/rankone.hpp"
#include "fluidcap/solvers.hpp"
#include "fluidcap/harness.hpp"
