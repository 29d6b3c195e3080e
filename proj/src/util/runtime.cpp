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

#include <atomic>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "rrlab/log.hpp"
#include "rrlab/parallel.hpp"

namespace rrlab {
namespace {

int DefaultThreads() {
  if (const char* env = std::getenv("RRLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

std::atomic<int> g_threads{0};

void ToStderr(std::string_view m) { std::cerr << m << '\n'; }

std::mutex g_log_mutex;
LogSink g_sink = ToStderr;

}  // namespace

void SetThreads(int threads) { g_threads = std::max(threads, 1); }

int Threads() {
  int n = g_threads.load();
  if (n == 0) {
    n = DefaultThreads();
    g_threads = n;
  }
  return n;
}

void ParallelFor(size_t n, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min(static_cast<size_t>(Threads()), n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void SetLogSink(LogSink sink) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_sink = std::move(sink);
}

void UseStderrLog() { SetLogSink(ToStderr); }

void Log(std::string_view message) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  if (g_sink) g_sink(message);
}

}  // namespace rrlab
