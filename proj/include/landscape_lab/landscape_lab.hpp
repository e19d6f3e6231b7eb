/*
 Copyright 2026 The landscape_lab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef LANDSCAPE_LAB_LANDSCAPE_LAB_HPP
#define LANDSCAPE_LAB_LANDSCAPE_LAB_HPP

#include "landscape_lab/core.hpp"
#include "landscape_lab/counterexamples.hpp"
#include "landscape_lab/landscape.hpp"
#include "landscape_lab/nnls.hpp"
#include "landscape_lab/qdyn.hpp"
#include "landscape_lab/traps.hpp"

#endif  // LANDSCAPE_LAB_LANDSCAPE_LAB_HPP
