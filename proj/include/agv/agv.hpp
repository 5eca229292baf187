// Copyright 2026 The agv-qubo Authors
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

#include "agv/anneal.hpp"
#include "agv/exact.hpp"
#include "agv/generate.hpp"
#include "agv/ilp.hpp"
#include "agv/instance.hpp"
#include "agv/preprocess.hpp"
#include "agv/qubo.hpp"
#include "agv/rational.hpp"
#include "agv/solve.hpp"
#include "agv/verify.hpp"
