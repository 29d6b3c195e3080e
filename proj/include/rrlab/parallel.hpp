// Copyright 2026 The rrlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RRLAB_PARALLEL_HPP_
#define RRLAB_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace rrlab {

// Worker cap for ParallelFor. Defaults to RRLAB_THREADS when set, otherwise
// the hardware concurrency. Values below 1 mean 1.
void SetThreads(int threads);
int Threads();

// Runs fn(i) for i in [0, n) on up to Threads() workers. Each index must
// write only its own output slot; the first exception is rethrown.
void ParallelFor(size_t n, const std::function<void(size_t)>& fn);

}  // namespace rrlab

#endif  // RRLAB_PARALLEL_HPP_
