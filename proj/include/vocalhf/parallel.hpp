// Copyright 2026 The vocalhf Authors
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

#include <cstddef>
#include <functional>

namespace vocalhf {

/// Worker count for `jobs`: 0 means the hardware concurrency.
unsigned resolve_jobs(unsigned jobs);

/// Calls fn(i) for every i in [0, n) on up to `jobs` threads. Each call
/// should write only to its own slot so results do not depend on the job
/// count. If any call throws, the exception of the lowest failing index is
/// rethrown once all workers have stopped.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace vocalhf
