// Copyright 2026 The qmetric Authors
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

#include "qmetric/algebra.hpp"
#include "qmetric/axioms.hpp"
#include "qmetric/construct.hpp"
#include "qmetric/element.hpp"
#include "qmetric/error.hpp"
#include "qmetric/io.hpp"
#include "qmetric/lipschitz.hpp"
#include "qmetric/random.hpp"
#include "qmetric/search.hpp"
#include "qmetric/shape.hpp"
#include "qmetric/simplex.hpp"
