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

#ifndef RRLAB_LOG_HPP_
#define RRLAB_LOG_HPP_

#include <functional>
#include <string>
#include <string_view>

namespace rrlab {

// Progress and diagnostics go to standard error unless redirected.
using LogSink = std::function<void(std::string_view)>;

void SetLogSink(LogSink sink);  // an empty sink silences logging
void UseStderrLog();
void Log(std::string_view message);

}  // namespace rrlab

#endif  // RRLAB_LOG_HPP_
