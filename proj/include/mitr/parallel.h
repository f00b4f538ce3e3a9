// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace mitr {

/// Worker count: `requested` when positive, else MITR_THREADS when set,
/// else the hardware concurrency.
int resolve_thread_count(int requested);

/// Run `fn(i)` for every i in [0, count) on `threads` workers pulling
/// indices from a shared counter. The first exception thrown by any task
/// stops the remaining work and is rethrown on the calling thread.
void parallel_for(int count, int threads, const std::function<void(int)> &fn);

}  // namespace mitr
