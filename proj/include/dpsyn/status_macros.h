//
// Copyright 2026 The DPSyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPSYN_STATUS_MACROS_H_
#define DPSYN_STATUS_MACROS_H_

#include <utility>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define DPSYN_STATUS_CONCAT_INNER_(a, b) a##b
#define DPSYN_STATUS_CONCAT_(a, b) DPSYN_STATUS_CONCAT_INNER_(a, b)

#define DPSYN_RETURN_IF_ERROR(expr)            \
  do {                                         \
    if (absl::Status _st = (expr); !_st.ok()) { \
      return _st;                              \
    }                                          \
  } while (0)

#define DPSYN_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, rexpr) \
  auto tmp = (rexpr);                                 \
  if (!tmp.ok()) return std::move(tmp).status();      \
  lhs = std::move(tmp).value()

// Evaluates `rexpr` (an absl::StatusOr<T>), returning its status on error and
// otherwise assigning the value to `lhs`.
#define DPSYN_ASSIGN_OR_RETURN(lhs, rexpr) \
  DPSYN_ASSIGN_OR_RETURN_IMPL_(            \
      DPSYN_STATUS_CONCAT_(_status_or_, __LINE__), lhs, rexpr)

#endif  // DPSYN_STATUS_MACROS_H_
