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


#ifndef DISA_DISA_HPP
#define DISA_DISA_HPP

#include "disa/cli.hpp"
#include "disa/embeddings.hpp"
#include "disa/error.hpp"
#include "disa/eval.hpp"
#include "disa/feature_table.hpp"
#include "disa/fusion.hpp"
#include "disa/gradient_suite.hpp"
#include "disa/model.hpp"
#include "disa/numerics.hpp"
#include "disa/phonetics.hpp"
#include "disa/pinyin.hpp"
#include "disa/synthetic.hpp"
#include "disa/text.hpp"
#include "disa/training.hpp"
#include "disa/visual.hpp"

#endif  // DISA_DISA_HPP
