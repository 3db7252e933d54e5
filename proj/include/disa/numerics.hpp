// Copyright 2026 The Disa Authors. All Rights Reserved.
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


#ifndef DISA_NUMERICS_HPP
#define DISA_NUMERICS_HPP

#include "disa/numerics/conv.hpp"
#include "disa/numerics/gradcheck.hpp"
#include "disa/numerics/layers.hpp"
#include "disa/numerics/optimizer.hpp"
#include "disa/numerics/projection.hpp"
#include "disa/numerics/svd.hpp"
#include "disa/numerics/tensor.hpp"

#endif  // DISA_NUMERICS_HPP
