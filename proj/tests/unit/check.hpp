// Copyright 2026 The CBF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include "cbf/error.hpp"
#include "doctest.h"

// Passes when `expr` throws cbf::Error of the given kind.
#define CHECK_CBF_ERROR(expr, expected_kind)                                 \
  do {                                                                       \
    bool thrown_ = false;                                                    \
    try {                                                                    \
      (void)(expr);                                                          \
    } catch (const ::cbf::Error& e_) {                                       \
      thrown_ = true;                                                        \
      CHECK_MESSAGE(e_.kind() == (expected_kind), "kind " << ::cbf::to_string(e_.kind())); \
    }                                                                        \
    CHECK_MESSAGE(thrown_, "no cbf::Error from " #expr);                     \
  } while (0)
