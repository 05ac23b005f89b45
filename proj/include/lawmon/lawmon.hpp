// Copyright 2026 The lawmon Authors
//
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

#pragma once

#include "lawmon/calibration.hpp"
#include "lawmon/cli.hpp"
#include "lawmon/config.hpp"
#include "lawmon/dataset_io.hpp"
#include "lawmon/decision_inference.hpp"
#include "lawmon/highway_monitor.hpp"
#include "lawmon/intersection_monitor.hpp"
#include "lawmon/mtl/offline.hpp"
#include "lawmon/mtl/online.hpp"
#include "lawmon/mtl/parser.hpp"
#include "lawmon/report.hpp"
