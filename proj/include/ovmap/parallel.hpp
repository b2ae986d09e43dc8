#pragma once

namespace ovmap {

/// Caps the number of worker threads used by parallel loops (0 restores the default).
void set_thread_limit(int threads);
int thread_limit();

}  // namespace ovmap
