// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace rme {

/// Number of worker threads used by parallel_for when the caller passes 0.
/// Defaults to the RME_THREADS environment variable, else 1.
std::size_t default_thread_count();
void set_default_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; callers write results into per-index slots so that output does
/// not depend on scheduling. The first exception thrown by any body is
/// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace rme
